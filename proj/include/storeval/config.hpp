#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "storeval/dual.hpp"
#include "storeval/gridbasis.hpp"
#include "storeval/problem.hpp"
#include "storeval/process.hpp"

namespace storeval {

/// Minimal INI reader: [section] headers, key = value lines, '#' comments.
struct IniFile {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;

    static IniFile parse_file(const std::filesystem::path& path);
    static IniFile parse_string(const std::string& text);

    const std::string* find(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
};

struct SwingSpec {
    double strike = 0.0;
    double m_daily = 0.0;
    double M_daily = 1.0;
    double cum_min = 0.0;
    double cum_max = 1.0;
    int horizon = 1;
};

struct BasisSpec {
    std::vector<double> y_edges;
    std::vector<double> x_edges;
    std::vector<Monomial> monomials;
    int extra_x_row = -1;  // x-row receiving extra monomials, -1 for none
    std::vector<Monomial> extra_monomials;

    PatchBasis build() const;
};

/// Everything one end-to-end run needs; parsed from a single config file so a
/// run is fully described by (file, master seed).
struct RunConfig {
    std::string problem_kind = "gas";  // gas | swing | finite
    GasStorageSpec gas;
    SwingSpec swing;
    std::filesystem::path instance_file;

    JumpDiffusionParams process;

    Interval y_domain{0.0, 20.0};
    std::vector<GridSegment> x0_segments;
    std::size_t apriori_n_y = 6;
    std::uint64_t lattice_generator = 1;
    std::string apriori_candidates = "bangbang";  // bangbang | refined:<n>

    BasisSpec basis;

    DualImpl dual_impl = DualImpl::curve_fit;
    std::size_t dual_n_y = 320;
    int dual_n_h = 33;
    std::vector<double> phi_edges{0.0, 7.0, 14.0, 20.0};
    int phi_degree = 3;
    std::size_t dual_paths = 10000;
    ContinuationMode cont_mode = ContinuationMode::regressed;
    std::size_t nested_l = 64;

    std::vector<double> x0_values{3.0, 6.0, 9.0};
    std::vector<double> y0_grid;

    std::size_t policy_paths = 50000;

    std::size_t oracle_chain_paths = 64;

    std::uint64_t master_seed = 1;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_ini(const IniFile& ini);

    ControlProblem build_problem() const;  // gas or swing
    std::shared_ptr<const PatchBasis> build_basis() const;
    std::shared_ptr<const PatchBasis> build_phi() const;
    CandidateRule apriori_rule() const;
};

/// Parsing helpers shared with the CLI.
std::vector<double> parse_double_list(const std::string& text);      // "3,6,9"
std::vector<double> parse_linspace(const std::string& text);         // "0:20:21"
Interval parse_interval(const std::string& text);                    // "0:20"
std::vector<GridSegment> parse_segments(const std::string& text);    // "0:5:2500,..."
Monomial parse_monomial(const std::string& token);                   // "1", "x2y", ...
std::vector<Monomial> parse_monomials(const std::string& text);

}  // namespace storeval
