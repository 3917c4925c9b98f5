#include <json.hpp>

#include "hermcurv/curvature.hpp"

namespace hermcurv {

namespace {

using nlohmann::json;

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json mjson(const CMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(cjson(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json vjson(const std::vector<cplx>& v) {
    json a = json::array();
    for (auto z : v) a.push_back(cjson(z));
    return a;
}

}  // namespace

std::string report_to_json(const std::vector<CurvatureReport>& reports, const std::string& manifold, int indent) {
    json out;
    out["schema_version"] = 1;
    out["manifold"] = manifold;
    out["records"] = json::array();
    for (const CurvatureReport& r : reports) {
        json j;
        j["point"] = vjson(r.point);
        j["t"] = r.t;
        j["s1"] = r.ricci.s1;
        j["s2"] = r.ricci.s2;
        j["ric"] = {{"1", mjson(r.ricci.ric1)}, {"2", mjson(r.ricci.ric2)}, {"3", mjson(r.ricci.ric3)},
                    {"4", mjson(r.ricci.ric4)}};
        j["torsion"] = {{"del_omega2", r.torsion.del_omega2},
                        {"del_star2", r.torsion.del_star2},
                        {"delbar_star2", r.torsion.delbar_star2},
                        {"ddstar_pair", r.torsion.ddstar_pair},
                        {"del_star_omega", vjson(r.torsion.del_star_omega)}};
        j["lee"] = r.torsion.lee;
        j["class_residuals"] = {{"kahler", r.classes.kahler},
                                {"balanced", r.classes.balanced},
                                {"gauduchon", r.classes.gauduchon},
                                {"pluriclosed", r.classes.pluriclosed}};
        out["records"].push_back(j);
    }
    return out.dump(indent);
}

}  // namespace hermcurv
