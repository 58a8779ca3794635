#include "wca/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wca/error.hpp"

namespace wca {

namespace {

std::string dec(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::size_t from = 0;
    while (true) {
        std::size_t comma = line.find(',', from);
        out.push_back(trimmed(line.substr(from, comma - from)));
        if (comma == std::string::npos) break;
        from = comma + 1;
    }
    return out;
}

// strtod with full-token consumption; hex floats parse as written.
double number(const std::string& token, const std::string& path, int line,
              const std::string& column) {
    const char* s = token.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s, &end);
    if (token.empty() || end != s + token.size())
        fail(path, " line ", line, ": column '", column, "' is not a number: '", token, "'");
    return v;
}

long integer(const std::string& token, const std::string& path, int line,
             const std::string& column) {
    const char* s = token.c_str();
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(s, &end, 10);
    if (token.empty() || end != s + token.size() || errno == ERANGE)
        fail(path, " line ", line, ": column '", column, "' is not an integer: '", token,
             "'");
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::pair<int, std::vector<std::string>>> rows;  // line number, fields
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    require(in.is_open(), "cannot open '", path, "'");
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        std::vector<std::string> fields = split_row(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        require(fields.size() == t.header.size(), path, " line ", lineno, ": expected ",
                t.header.size(), " fields, got ", fields.size());
        t.rows.emplace_back(lineno, std::move(fields));
    }
    require(!t.header.empty(), path, ": missing header row");
    require(!t.rows.empty(), path, ": no data rows");
    return t;
}

// Coordinate columns are everything except a single optional `weight`.
struct PointLayout {
    std::vector<int> coord;
    int weight = -1;
};

PointLayout point_layout(const Table& t, const std::string& path) {
    PointLayout lay;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c] == "weight") {
            require(lay.weight < 0, path, " line 1: duplicate 'weight' column");
            lay.weight = static_cast<int>(c);
        } else {
            lay.coord.push_back(static_cast<int>(c));
        }
    }
    require(!lay.coord.empty(), path, " line 1: header has no coordinate columns");
    return lay;
}

std::vector<Vec> read_rows(const Table& t, const PointLayout& lay, const std::string& path,
                           std::vector<double>* weights) {
    std::vector<Vec> pts;
    for (const auto& [lineno, fields] : t.rows) {
        Vec x(static_cast<int>(lay.coord.size()));
        for (std::size_t c = 0; c < lay.coord.size(); ++c) {
            int col = lay.coord[c];
            x[static_cast<int>(c)] =
                number(fields[static_cast<std::size_t>(col)], path, lineno, t.header[col]);
            require(std::isfinite(x[static_cast<int>(c)]), path, " line ", lineno,
                    ": column '", t.header[col], "' must be finite");
        }
        pts.push_back(std::move(x));
        if (weights) {
            double w = 1.0;
            if (lay.weight >= 0)
                w = number(fields[static_cast<std::size_t>(lay.weight)], path, lineno,
                           "weight");
            require(std::isfinite(w) && w > 0, path, " line ", lineno,
                    ": weight must be finite and > 0, got ", w);
            weights->push_back(w);
        }
    }
    return pts;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    require(out.is_open(), "cannot write '", path, "'");
    return out;
}

nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.is_open(), "cannot open '", path, "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(path, ": ", e.what());
    }
}

double json_number(const nlohmann::json& v, const std::string& path, const char* what) {
    // offsets and weights are stored as hex strings; accept plain numbers too
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const char* c = s.c_str();
        char* end = nullptr;
        double d = std::strtod(c, &end);
        if (!s.empty() && end == c + s.size()) return d;
    }
    fail(path, ": ", what, " must be a number or a numeric string");
}

}  // namespace

std::string hex_double(double v) {
    require(std::isfinite(v), "only finite values have a file representation, got ", v);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

WeightBounds InstanceConfig::bounds(int clusters) const {
    if (!kappa) return WeightBounds::unconstrained(clusters);
    require(static_cast<int>(kappa->size()) == clusters, "config lists ", kappa->size(),
            " kappa windows for ", clusters, " clusters");
    std::vector<double> lo, hi;
    for (const auto& [l, h] : *kappa) {
        lo.push_back(l);
        hi.push_back(h);
    }
    return WeightBounds(std::move(lo), std::move(hi));
}

NormFamily InstanceConfig::norm_family(int clusters, int dim) const {
    if (!norms) return NormFamily::identity(clusters, dim);
    require(static_cast<int>(norms->size()) == clusters, "config lists ", norms->size(),
            " norm matrices for ", clusters, " clusters");
    for (std::size_t i = 0; i < norms->size(); ++i)
        require((*norms)[i].rows() == dim && (*norms)[i].cols() == dim, "config matrix ", i,
                " is ", (*norms)[i].rows(), "x", (*norms)[i].cols(), ", the data is ", dim,
                "-dimensional");
    return NormFamily(*norms);
}

InstanceConfig read_config(const std::string& path) {
    nlohmann::json j = parse_json_file(path);
    require(j.is_object(), path, ": config must be a JSON object");
    InstanceConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "k") {
            require(value.is_number_integer() && value.get<long>() >= 1, path,
                    ": k must be a positive integer");
            cfg.k = value.get<int>();
        } else if (key == "kappa") {
            require(value.is_array() && !value.empty(), path,
                    ": kappa must be a nonempty array of [lo, hi] pairs");
            std::vector<std::pair<double, double>> windows;
            for (std::size_t i = 0; i < value.size(); ++i) {
                const auto& pair = value[i];
                require(pair.is_array() && pair.size() == 2, path, ": kappa entry ", i,
                        " must be a [lo, hi] pair");
                auto side = [&](const nlohmann::json& v) -> double {
                    if (v.is_string() && v.get<std::string>() == "inf") return kInf;
                    require(v.is_number(), path, ": kappa entry ", i,
                            " sides must be numbers or \"inf\"");
                    return v.get<double>();
                };
                windows.emplace_back(side(pair[0]), side(pair[1]));
            }
            cfg.kappa = std::move(windows);
        } else if (key == "A") {
            if (value.is_string()) {
                require(value.get<std::string>() == "identity", path,
                        ": A must be \"identity\" or an array of matrices");
                continue;  // identity is the default
            }
            require(value.is_array() && !value.empty(), path,
                    ": A must be \"identity\" or a nonempty array of matrices");
            std::vector<Mat> mats;
            for (std::size_t i = 0; i < value.size(); ++i) {
                const auto& rows = value[i];
                require(rows.is_array() && !rows.empty(), path, ": matrix ", i,
                        " must be an array of rows");
                Mat m(static_cast<int>(rows.size()),
                      static_cast<int>(rows[0].is_array() ? rows[0].size() : 0));
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    require(rows[r].is_array() &&
                                static_cast<int>(rows[r].size()) == m.cols() && m.cols() > 0,
                            path, ": matrix ", i, " row ", r, " has the wrong length");
                    for (std::size_t c = 0; c < rows[r].size(); ++c) {
                        require(rows[r][c].is_number(), path, ": matrix ", i,
                                " entry is not a number");
                        m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
                    }
                }
                require(m.rows() == m.cols(), path, ": matrix ", i, " is ", m.rows(), "x",
                        m.cols(), ", must be square");
                mats.push_back(std::move(m));
            }
            cfg.norms = std::move(mats);
        } else {
            fail(path, ": unknown config key '", key, "'");
        }
    }
    return cfg;
}

void write_config(const std::string& path, int k,
                  const std::vector<std::pair<double, double>>& kappa) {
    nlohmann::ordered_json j;
    j["k"] = k;
    auto side = [](double v) -> nlohmann::ordered_json {
        if (v == kInf) return "inf";
        return v;
    };
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : kappa) windows.push_back({side(lo), side(hi)});
    j["kappa"] = std::move(windows);
    j["A"] = "identity";
    open_out(path) << j.dump(2) << "\n";
}

WeightedDataSet read_points_csv(const std::string& path) {
    Table t = read_table(path);
    PointLayout lay = point_layout(t, path);
    std::vector<double> w;
    std::vector<Vec> pts = read_rows(t, lay, path, &w);
    return WeightedDataSet(std::move(pts), std::move(w));
}

void write_points_csv(const std::string& path, const WeightedDataSet& X) {
    std::ofstream out = open_out(path);
    for (int c = 0; c < X.dim(); ++c) out << "x" << c << ",";
    out << "weight\n";
    for (int j = 0; j < X.n(); ++j) {
        for (int c = 0; c < X.dim(); ++c) out << dec(X.point(j)[c]) << ",";
        out << dec(X.weight(j)) << "\n";
    }
}

SiteSet read_sites_csv(const std::string& path) {
    Table t = read_table(path);
    PointLayout lay = point_layout(t, path);
    return SiteSet(read_rows(t, lay, path, nullptr));
}

void write_sites_csv(const std::string& path, const SiteSet& S) {
    std::ofstream out = open_out(path);
    for (int c = 0; c < S.dim(); ++c) out << (c ? "," : "") << "x" << c;
    out << "\n";
    for (int i = 0; i < S.k(); ++i) {
        for (int c = 0; c < S.dim(); ++c) out << (c ? "," : "") << dec(S.site(i)[c]);
        out << "\n";
    }
}

Clustering read_clustering_csv(const std::string& path, int n, int k_min) {
    require(n >= 1, "clustering for ", n, " points makes no sense");
    require(k_min >= 1, "cluster count floor must be at least 1, got ", k_min);
    Table t = read_table(path);
    require(t.header == std::vector<std::string>({"cluster", "point", "fraction"}), path,
            " line 1: clustering header must be 'cluster,point,fraction'");
    struct Entry {
        int i, j;
        double f;
    };
    std::vector<Entry> entries;
    int k = k_min;
    for (const auto& [lineno, fields] : t.rows) {
        long i = integer(fields[0], path, lineno, "cluster");
        long j = integer(fields[1], path, lineno, "point");
        double f = number(fields[2], path, lineno, "fraction");
        require(i >= 0, path, " line ", lineno, ": cluster index must be >= 0, got ", i);
        require(j >= 0 && j < n, path, " line ", lineno, ": point index ", j, " outside [0, ",
                n, ")");
        require(std::isfinite(f) && f > 0, path, " line ", lineno,
                ": fraction must be finite and > 0, got ", f);
        k = std::max(k, static_cast<int>(i) + 1);
        entries.push_back({static_cast<int>(i), static_cast<int>(j), f});
    }
    Mat xi = Mat::Zero(k, n);
    for (const Entry& e : entries) {
        require(xi(e.i, e.j) == 0.0, path, ": duplicate entry for cluster ", e.i, ", point ",
                e.j);
        xi(e.i, e.j) = e.f;
    }
    try {
        return Clustering(std::move(xi));
    } catch (const Error& e) {
        fail(path, ": ", e.what());
    }
}

void write_clustering_csv(const std::string& path, const Clustering& C) {
    std::ofstream out = open_out(path);
    out << "cluster,point,fraction\n";
    for (int i = 0; i < C.k(); ++i)
        for (int j = 0; j < C.n(); ++j)
            if (C.xi(i, j) >= 1e-9)
                out << i << "," << j << "," << hex_double(C.xi(i, j)) << "\n";
}

Coreset read_coreset_json(const std::string& path) {
    nlohmann::json j = parse_json_file(path);
    try {
        const auto& jp = j.at("points");
        const auto& jw = j.at("weights");
        require(jp.is_array() && jw.is_array() && jp.size() == jw.size() && !jp.empty(),
                path, ": points/weights must be matching nonempty arrays");
        std::vector<Vec> pts;
        std::vector<double> w;
        for (std::size_t m = 0; m < jp.size(); ++m) {
            const auto& row = jp[m];
            require(row.is_array() && !row.empty(), path, ": point ", m,
                    " must be a coordinate array");
            Vec x(static_cast<int>(row.size()));
            for (std::size_t c = 0; c < row.size(); ++c)
                x[static_cast<int>(c)] = json_number(row[c], path, "coordinate");
            pts.push_back(std::move(x));
            w.push_back(json_number(jw[m], path, "weight"));
        }
        std::vector<std::vector<Route>> routing;
        for (const auto& routes : j.at("routing")) {
            require(routes.is_array(), path, ": routing entries must be arrays");
            std::vector<Route> rr;
            for (const auto& r : routes) {
                require(r.is_array() && r.size() == 2, path,
                        ": a route is a [target, fraction] pair");
                rr.push_back(Route{r[0].get<int>(), json_number(r[1], path, "fraction")});
            }
            routing.push_back(std::move(rr));
        }
        const auto& jprov = j.at("provenance");
        Provenance prov;
        prov.alg = json_number(jprov.at("alg"), path, "provenance.alg");
        prov.eps0 = json_number(jprov.at("eps0"), path, "provenance.eps0");
        prov.vbar = json_number(jprov.at("vbar"), path, "provenance.vbar");
        prov.lines = jprov.at("lines").get<long long>();
        prov.batches = jprov.at("batches").get<long long>();
        prov.seed = jprov.at("seed").get<std::uint64_t>();
        return Coreset(WeightedDataSet(std::move(pts), std::move(w)), std::move(routing),
                       json_number(j.at("source_weight"), path, "source_weight"),
                       json_number(j.at("epsilon"), path, "epsilon"),
                       json_number(j.at("delta"), path, "delta"),
                       json_number(j.at("delta_plus"), path, "delta_plus"),
                       json_number(j.at("delta_minus"), path, "delta_minus"), prov);
    } catch (const nlohmann::json::exception& e) {
        fail(path, ": ", e.what());
    } catch (const Error& e) {
        fail(path, ": ", e.what());
    }
}

void write_coreset_json(const std::string& path, const Coreset& cs) {
    nlohmann::ordered_json j;
    auto points = nlohmann::ordered_json::array();
    auto weights = nlohmann::ordered_json::array();
    const WeightedDataSet& P = cs.points();
    for (int m = 0; m < P.n(); ++m) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < P.dim(); ++c) row.push_back(P.point(m)[c]);
        points.push_back(std::move(row));
        weights.push_back(hex_double(P.weight(m)));
    }
    j["points"] = std::move(points);
    j["weights"] = std::move(weights);
    auto routing = nlohmann::ordered_json::array();
    for (const auto& routes : cs.routing()) {
        auto rr = nlohmann::ordered_json::array();
        for (const Route& r : routes)
            rr.push_back({r.target, hex_double(r.fraction)});
        routing.push_back(std::move(rr));
    }
    j["routing"] = std::move(routing);
    j["source_weight"] = hex_double(cs.source_weight());
    j["epsilon"] = cs.epsilon();
    j["delta"] = cs.delta();
    j["delta_plus"] = hex_double(cs.delta_plus());
    j["delta_minus"] = hex_double(cs.delta_minus());
    const Provenance& prov = cs.provenance();
    j["provenance"] = {{"alg", prov.alg},
                       {"eps0", prov.eps0},
                       {"vbar", prov.vbar},
                       {"lines", prov.lines},
                       {"batches", prov.batches},
                       {"seed", prov.seed}};
    open_out(path) << j.dump(2) << "\n";
}

}  // namespace wca
