#include "gridsync/io.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

namespace gridsync {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct NumberTable {
    std::vector<std::vector<double>> rows;
    int first_line = 0;
};

// extracts "mpc.<name> = [ rows ];" where rows are whitespace-separated
// numbers, one row per line or ';'-separated
NumberTable extract_table(std::string_view text, const std::string& name) {
    const std::string key = "mpc." + name;
    std::size_t pos = text.find(key);
    if (pos == std::string_view::npos)
        throw ParseError("missing matrix mpc." + name);
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    std::size_t open = text.find('[', pos);
    std::size_t close = text.find(']', open);
    if (open == std::string_view::npos || close == std::string_view::npos)
        throw ParseError("unterminated matrix mpc." + name, line);

    NumberTable table;
    table.first_line = line;
    std::string_view body = text.substr(open + 1, close - open - 1);
    std::vector<double> row;
    std::string tok;
    int cur_line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));
    auto flush_tok = [&]() {
        if (tok.empty()) return;
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw ParseError("bad number '" + tok + "' in mpc." + name, cur_line);
        row.push_back(v);
        tok.clear();
    };
    auto flush_row = [&]() {
        flush_tok();
        if (!row.empty()) {
            table.rows.push_back(row);
            row.clear();
        }
    };
    bool in_comment = false;
    for (char c : body) {
        if (c == '\n') {
            in_comment = false;
            flush_row();
            ++cur_line;
            continue;
        }
        if (in_comment) continue;
        if (c == '%') {
            in_comment = true;
            continue;
        }
        if (c == ';') {
            flush_row();
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            flush_tok();
        } else {
            tok += c;
        }
    }
    flush_row();
    return table;
}

double table_scalar(std::string_view text, const std::string& name, double fallback) {
    const std::string key = "mpc." + name;
    std::size_t pos = text.find(key);
    if (pos == std::string_view::npos) return fallback;
    std::size_t eq = text.find('=', pos);
    if (eq == std::string_view::npos) return fallback;
    return std::strtod(std::string(text.substr(eq + 1, 40)).c_str(), nullptr);
}

}  // namespace

CaseFile parse_case_file(std::string_view text) {
    CaseFile c;
    c.base_mva = table_scalar(text, "baseMVA", 100.0);

    NumberTable bus = extract_table(text, "bus");
    for (std::size_t r = 0; r < bus.rows.size(); ++r) {
        const auto& row = bus.rows[r];
        if (row.size() < 2)
            throw ParseError("bus row needs at least id and type", bus.first_line);
        c.bus_ids.push_back(static_cast<int>(row[0]));
        c.bus_types.push_back(static_cast<int>(row[1]));
    }
    if (c.bus_ids.empty()) throw ParseError("empty bus matrix");

    NumberTable gen = extract_table(text, "gen");
    for (const auto& row : gen.rows) {
        if (row.empty()) continue;
        c.gen_buses.push_back(static_cast<int>(row[0]));
    }
    if (c.gen_buses.empty()) throw ParseError("case has no generators", gen.first_line);

    NumberTable branch = extract_table(text, "branch");
    for (const auto& row : branch.rows) {
        if (row.size() < 11)
            throw ParseError("branch row needs 11+ columns", branch.first_line);
        CaseBranch b;
        b.from_bus = static_cast<int>(row[0]);
        b.to_bus = static_cast<int>(row[1]);
        b.r = row[2];
        b.x = row[3];
        b.in_service = row[10] != 0.0;
        c.branches.push_back(b);
    }
    return c;
}

PowerGraph to_power_graph(const CaseFile& c, const MatpowerOptions& opts) {
    std::map<int, int> index_of;
    for (std::size_t i = 0; i < c.bus_ids.size(); ++i) {
        if (!index_of.emplace(c.bus_ids[i], static_cast<int>(i)).second)
            throw ParseError("duplicate bus id " + std::to_string(c.bus_ids[i]));
    }
    std::vector<Edge> edges;
    for (const CaseBranch& b : c.branches) {
        if (!b.in_service) continue;
        auto fi = index_of.find(b.from_bus);
        auto ti = index_of.find(b.to_bus);
        if (fi == index_of.end() || ti == index_of.end())
            throw InvalidBranch("branch references unknown bus");
        if (fi->second == ti->second) throw InvalidBranch("branch endpoints coincide");
        if (!(b.x > 0.0)) throw InvalidBranch("branch reactance must be positive");
        double w = opts.convention == SusceptanceConvention::ReciprocalReactance
                       ? 1.0/b.x
                       : b.x/(b.r*b.r + b.x*b.x);
        edges.push_back({fi->second, ti->second, w});
    }
    std::set<int> gens;
    for (int bus : c.gen_buses) {
        auto it = index_of.find(bus);
        if (it == index_of.end()) throw InvalidBranch("generator references unknown bus");
        gens.insert(it->second);
    }
    return PowerGraph(static_cast<int>(c.bus_ids.size()), std::move(edges),
                      {gens.begin(), gens.end()}, opts.inertia, opts.damping);
}

PowerGraph parse_matpower(std::string_view text, const MatpowerOptions& opts) {
    return to_power_graph(parse_case_file(text), opts);
}

PowerGraph parse_graph_json(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
            throw ParseError("/schema_version: expected 1");
        int n = doc.at("n").get<int>();
        std::vector<Edge> edges;
        for (std::size_t l = 0; l < doc.at("edges").size(); ++l) {
            const auto& je = doc["edges"][l];
            Edge e{je.at("i").get<int>(), je.at("j").get<int>(), je.at("weight").get<double>()};
            if (e.weight < 0.0)
                throw ParseError("/edges/" + std::to_string(l) + "/weight: negative");
            edges.push_back(e);
        }
        std::vector<int> gens = doc.at("generators").get<std::vector<int>>();
        std::optional<Vec> injections;
        if (doc.contains("injections") && !doc["injections"].is_null())
            injections = doc["injections"].get<Vec>();
        double m = doc.value("inertia", 1.0);
        double d = doc.value("damping", 1.0);
        return PowerGraph(n, std::move(edges), std::move(gens), m, d, std::move(injections));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph document: ") + e.what());
    }
}

std::string serialize_graph(const PowerGraph& g) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["n"] = g.node_count();
    doc["edges"] = ordered_json::array();
    for (const Edge& e : g.edges())
        doc["edges"].push_back({{"i", e.i}, {"j", e.j}, {"weight", e.weight}});
    doc["generators"] = g.generators();
    doc["inertia"] = g.inertia();
    doc["damping"] = g.damping();
    if (g.injections()) doc["injections"] = *g.injections();
    return doc.dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw Error("cannot open " + tmp + " for writing");
    bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size();
    ok = (std::fclose(f) == 0) && ok;
    if (!ok || std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error("failed to write " + path);
    }
}

std::string montecarlo_csv(const MonteCarloReport& rep) {
    std::string out = "sample_index,strategy,norm_omega_tilde,norm_omega,ok,seed\n";
    for (int s = 0; s < rep.sample_count; ++s) {
        const MonteCarloSample& rec = rep.samples[s];
        for (std::size_t v = 0; v < rep.variant_names.size(); ++v) {
            out += std::to_string(s) + ',' + rep.variant_names[v] + ',' +
                   fmt17(rec.norm_tilde[v]) + ',' + fmt17(rec.norm_omega[v]) + ',' +
                   (rec.ok ? "1" : "0") + ',' + std::to_string(rep.seed) + '\n';
        }
    }
    return out;
}

std::string sweep_csv(const std::vector<std::pair<double, PsiSweepResult>>& sweeps) {
    std::string out = "gamma,psi,feasible,optimal_value\n";
    for (const auto& [gamma, sweep] : sweeps) {
        for (const SweepPoint& pt : sweep.points) {
            out += fmt17(gamma) + ',' + fmt17(pt.psi) + ',' + (pt.feasible ? "1" : "0") + ',' +
                   (pt.feasible ? fmt17(pt.optimal_value) : std::string("nan")) + '\n';
        }
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "time";
    for (int a = 0; a < traj.delta_gen.cols(); ++a)
        out += ",delta_gen" + std::to_string(a);
    for (int a = 0; a < traj.omega_gen.cols(); ++a)
        out += ",omega_gen" + std::to_string(a);
    for (int b = 0; b < traj.delta_load.cols(); ++b)
        out += ",delta_load" + std::to_string(b);
    out += ",converged\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        out += fmt17(traj.times[s]);
        for (int a = 0; a < traj.delta_gen.cols(); ++a)
            out += ',' + fmt17(traj.delta_gen(static_cast<int>(s), a));
        for (int a = 0; a < traj.omega_gen.cols(); ++a)
            out += ',' + fmt17(traj.omega_gen(static_cast<int>(s), a));
        for (int b = 0; b < traj.delta_load.cols(); ++b)
            out += ',' + fmt17(traj.delta_load(static_cast<int>(s), b));
        out += traj.converged[s] ? ",1\n" : ",0\n";
    }
    return out;
}

std::string optimization_json(const OptimizationResult& res, const DesignProblem& prob) {
    ordered_json doc;
    doc["schema_version"] = 1;
    const char* status = res.status == OptimizationResult::Status::Converged ? "converged"
                         : res.status == OptimizationResult::Status::Infeasible ? "infeasible"
                                                                                : "not_converged";
    doc["status"] = status;
    doc["objective"] = res.objective;
    doc["r_tot_reduced"] = res.r_tot_reduced;
    doc["lambda2"] = res.lambda2;
    doc["stationarity"] = res.stationarity;
    doc["feasibility_violation"] = res.feasibility_violation;
    doc["iterations"] = res.iterations;
    doc["budget_used"] = res.budget_used;
    doc["alpha"] = prob.alpha;
    doc["beta"] = prob.beta;
    doc["lower_bound_active"] = res.lower_bound_active;
    doc["x_star"] = ordered_json::array();
    auto cands = prob.resolved_candidates();
    for (std::size_t e = 0; e < res.x_star.size(); ++e)
        doc["x_star"].push_back(
            {{"i", cands[e].first}, {"j", cands[e].second}, {"delta_weight", res.x_star[e]}});
    return doc.dump(2) + "\n";
}

std::string certificates_json(const std::vector<Certificate>& certs, double gamma, double psi) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["gamma"] = gamma;
    doc["psi"] = psi;
    doc["certificates"] = ordered_json::array();
    for (const Certificate& c : certs) {
        const char* kind = c.kind == Certificate::Kind::Exact ? "exact"
                           : c.kind == Certificate::Kind::Spectral ? "spectral"
                                                                   : "conductance";
        doc["certificates"].push_back({{"kind", kind},
                                       {"holds", c.holds},
                                       {"margin", c.margin},
                                       {"threshold", c.threshold}});
    }
    return doc.dump(2) + "\n";
}

Vec parse_vector_file(std::string_view text) {
    Vec out;
    std::string tok;
    bool comment = false;
    auto flush = [&]() {
        if (tok.empty()) return;
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw ParseError("bad number '" + tok + "'");
        out.push_back(v);
        tok.clear();
    };
    for (char c : text) {
        if (c == '\n') {
            comment = false;
            flush();
        } else if (comment) {
            continue;
        } else if (c == '#') {
            comment = true;
            flush();
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            flush();
        } else {
            tok += c;
        }
    }
    flush();
    return out;
}

}  // namespace gridsync
