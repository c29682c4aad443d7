#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stackroute/network.hpp"

namespace stackroute {

/// Parameter sweep: every p in p_list crossed with every h_max in
/// h_max_list, `runs` networks per cell. Run seeds derive from
/// (seed, p, run index) only — not from h_max — so cells at the same p
/// share their networks run for run and found-rates stay comparable
/// across height caps, even between separate invocations.
struct ExperimentSpec {
    std::size_t n = 30;
    std::size_t alpha = 2;
    std::vector<double> p_list;
    std::vector<std::size_t> h_max_list;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    std::size_t m_attach = 5;
    Cost default_cost = 1;

    bool with_oracle = true;        // per-run single-destination check
    std::size_t oracle_extra_height = 5;  // oracle_found cap = h_max + extra
    bool with_diameter = false;     // all-destination search; much slower
    std::size_t max_rounds = 1'000'000;
    unsigned jobs = 1;
};

/// One row of the sweep. The path check is between the network
/// extremities: source = first generated node, destination = last added
/// node. found means the source holds a row (dest, [x]) for some single
/// protocol x after quiescence.
struct RunRecord {
    std::size_t n = 0;
    std::size_t alpha = 0;
    double p = 0;
    std::size_t h_max = 0;
    std::uint64_t run_seed = 0;
    std::size_t rounds = 0;
    std::uint64_t messages = 0;
    bool found = false;
    std::optional<Cost> cost;          // best extremity row
    std::optional<Cost> oracle_cost;   // reference distance at h_max
    std::optional<bool> oracle_found;  // feasible within h_max + extra
    std::optional<std::size_t> diam;
    std::string error;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::string source_alias;
    std::string dest_alias;
    std::vector<RunRecord> rows;  // (p, h_max, run) order

    /// Fraction of error-free runs with found == true, in [0, 1].
    double found_rate(double p, std::size_t h_max) const;
    std::string csv() const;
};

std::uint64_t derive_run_seed(std::uint64_t master, double p, std::size_t run_index);

ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace stackroute
