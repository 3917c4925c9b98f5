#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hermcurv/errors.hpp"
#include "hermcurv/metric.hpp"

namespace hermcurv {

ModelManifold manifest_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("manifest is not valid JSON: ") + e.what());
    }
    for (const char* key : {"name", "n", "metric"})
        if (!j.contains(key)) throw Error(std::string("manifest missing key '") + key + "'");
    const std::string name = j["name"].get<std::string>();
    const int n = j["n"].get<int>();
    std::map<std::string, double> params;
    if (j.contains("params"))
        for (auto& [k, v] : j["params"].items()) params[k] = v.get<double>();
    std::vector<std::string> names;
    for (auto& [k, v] : params) names.push_back(k);

    std::string text_metric;
    for (auto& [k, v] : j["metric"].items()) text_metric += k + " = " + v.get<std::string>() + "\n";
    MetricExpr m = parse_metric(text_metric, n, names);

    ChartDomain d;
    if (j.contains("domain")) {
        const auto& dj = j["domain"];
        auto idx = [&](const char* key) {
            std::vector<int> out;
            if (dj.contains(key))
                for (auto& v : dj[key]) {
                    int k = v.get<int>();
                    if (k < 1 || k > n) throw Error(std::string("domain.") + key + " index out of range");
                    out.push_back(k - 1);
                }
            return out;
        };
        d.upper_half_plane = idx("upper_half_plane");
        d.nonzero = idx("nonzero");
        d.punctured = dj.value("punctured", false);
        d.periodic = dj.value("periodic", false);
        if (dj.contains("periods")) d.periods = dj["periods"].get<std::vector<double>>();
        if (d.periodic && !d.periods.empty() && int(d.periods.size()) != 2 * n)
            throw Error("domain.periods must list 2n values");
    }
    ModelManifold man(name, n, params, m, d);
    man.declared_gauduchon = j.value("gauduchon", false);
    man.declared_balanced = j.value("balanced", false);
    return man;
}

ModelManifold load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return manifest_from_json_text(ss.str());
}

}  // namespace hermcurv
