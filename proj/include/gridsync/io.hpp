#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridsync/dynamics.hpp"
#include "gridsync/graph.hpp"
#include "gridsync/optimizer.hpp"
#include "gridsync/sync_cert.hpp"

namespace gridsync {

/// Line weights from branch data: 1/x (pure reactance) or -Im(1/(r+jx)).
enum class SusceptanceConvention { ReciprocalReactance, ImaginaryAdmittance };

struct MatpowerOptions {
    SusceptanceConvention convention = SusceptanceConvention::ReciprocalReactance;
    double inertia = 1.0;
    double damping = 1.0;
};

struct CaseBranch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    bool in_service = true;
};

/// Raw MATPOWER case content (bus/gen/branch subset).
struct CaseFile {
    double base_mva = 100.0;
    std::vector<int> bus_ids;
    std::vector<int> bus_types;
    std::vector<int> gen_buses;
    std::vector<CaseBranch> branches;
};

CaseFile parse_case_file(std::string_view text);
PowerGraph to_power_graph(const CaseFile& c, const MatpowerOptions& opts = {});
PowerGraph parse_matpower(std::string_view text, const MatpowerOptions& opts = {});

/// Native JSON graph document (schema_version 1).
PowerGraph parse_graph_json(std::string_view text);
std::string serialize_graph(const PowerGraph& g);

/// Whole-file atomic write (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

/// sample_index, strategy, norm_omega_tilde, norm_omega, ok, seed
std::string montecarlo_csv(const MonteCarloReport& rep);
/// gamma, psi, feasible, optimal_value
std::string sweep_csv(const std::vector<std::pair<double, PsiSweepResult>>& sweeps);
/// time plus per-generator delta/omega columns and per-load delta columns
std::string trajectory_csv(const Trajectory& traj);

std::string optimization_json(const OptimizationResult& res, const DesignProblem& prob);
std::string certificates_json(const std::vector<Certificate>& certs, double gamma, double psi);

/// Parses whitespace-separated numbers (comment lines start with '#').
Vec parse_vector_file(std::string_view text);

}  // namespace gridsync
