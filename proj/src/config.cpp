#include "storeval/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "storeval/csv.hpp"

namespace storeval {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), "config: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
    IniFile file;
    std::istringstream in(text);
    std::string line;
    Section* current = nullptr;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "config: malformed section header: " + line);
            file.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            current = &file.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, "config: expected key = value: " + line);
        require(current != nullptr, "config: key outside any section: " + line);
        current->entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return file;
}

IniFile IniFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

const std::string* IniFile::find(const std::string& section, const std::string& key) const {
    for (const auto& s : sections) {
        if (s.name != section) continue;
        for (const auto& [k, v] : s.entries)
            if (k == key) return &v;
    }
    return nullptr;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    require(v != nullptr, "config: missing [" + section + "] " + key);
    return *v;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split(text, ','))
        if (!p.empty()) out.push_back(to_double(p));
    return out;
}

std::vector<double> parse_linspace(const std::string& text) {
    const auto parts = split(text, ':');
    require(parts.size() == 3, "config: expected lo:hi:count, got '" + text + "'");
    return linspace(to_double(parts[0]), to_double(parts[1]),
                    static_cast<std::size_t>(std::stoull(parts[2])));
}

Interval parse_interval(const std::string& text) {
    const auto parts = split(text, ':');
    require(parts.size() == 2, "config: expected lo:hi, got '" + text + "'");
    return {to_double(parts[0]), to_double(parts[1])};
}

std::vector<GridSegment> parse_segments(const std::string& text) {
    std::vector<GridSegment> out;
    for (const auto& p : split(text, ',')) {
        const auto parts = split(p, ':');
        require(parts.size() == 3, "config: expected lo:hi:count segment, got '" + p + "'");
        out.push_back({{to_double(parts[0]), to_double(parts[1])},
                       static_cast<std::size_t>(std::stoull(parts[2]))});
    }
    return out;
}

Monomial parse_monomial(const std::string& token) {
    if (token == "1") return {0, 0};
    Monomial m;
    std::size_t i = 0;
    while (i < token.size()) {
        const char var = token[i++];
        require(var == 'x' || var == 'y', "config: bad monomial '" + token + "'");
        int exp = 1;
        std::size_t j = i;
        while (j < token.size() && std::isdigit(static_cast<unsigned char>(token[j]))) ++j;
        if (j > i) {
            exp = std::stoi(token.substr(i, j - i));
            i = j;
        }
        (var == 'x' ? m.px : m.py) += exp;
    }
    return m;
}

std::vector<Monomial> parse_monomials(const std::string& text) {
    std::vector<Monomial> out;
    for (const auto& p : split(text, ','))
        if (!p.empty()) out.push_back(parse_monomial(p));
    return out;
}

PatchBasis BasisSpec::build() const {
    std::map<int, std::vector<Monomial>> extras;
    if (extra_x_row >= 0) extras[extra_x_row] = extra_monomials;
    return PatchBasis::tensor(y_edges, x_edges, monomials, extras);
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    return from_ini(IniFile::parse_file(path));
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
    RunConfig c;
    c.problem_kind = ini.get_or("problem", "kind", "gas");
    if (c.problem_kind == "gas") {
        auto num = [&](const char* key, double fallback) {
            return to_double(ini.get_or("problem", key, format_double(fallback, 17)));
        };
        c.gas.y_max = num("y_max_mmcf", c.gas.y_max);
        c.gas.y_base = num("y_base_mmcf", c.gas.y_base);
        c.gas.c_max_at_full = num("c_max_at_full", c.gas.c_max_at_full);
        c.gas.c_min_at_empty = num("c_min_at_empty", c.gas.c_min_at_empty);
        c.gas.loss_rate = num("loss_rate", c.gas.loss_rate);
        c.gas.r_annual = num("r_annual", c.gas.r_annual);
        c.gas.dt = num("dt_days", c.gas.dt);
        c.gas.volume_scale = num("volume_scale", c.gas.volume_scale);
        c.gas.horizon = std::stoi(ini.get_or("problem", "horizon_days", "365"));
    } else if (c.problem_kind == "swing") {
        c.swing.strike = to_double(ini.get("problem", "strike"));
        c.swing.m_daily = to_double(ini.get_or("problem", "m_daily", "0"));
        c.swing.M_daily = to_double(ini.get("problem", "M_daily"));
        c.swing.cum_min = to_double(ini.get_or("problem", "cum_min", "0"));
        c.swing.cum_max = to_double(ini.get("problem", "cum_max"));
        c.swing.horizon = std::stoi(ini.get("problem", "horizon_days"));
    } else if (c.problem_kind == "finite") {
        c.instance_file = ini.get("problem", "instance");
    } else {
        throw std::invalid_argument("config: unknown problem kind '" + c.problem_kind + "'");
    }

    if (const std::string* v = ini.find("process", "alpha")) c.process.alpha = to_double(*v);
    if (const std::string* v = ini.find("process", "beta")) c.process.beta = to_double(*v);
    if (const std::string* v = ini.find("process", "gamma_vol"))
        c.process.gamma_vol = to_double(*v);
    if (const std::string* v = ini.find("process", "lambda_jump"))
        c.process.lambda_jump = to_double(*v);
    if (c.problem_kind != "finite") c.process.mu_jump = to_double(ini.get("process", "mu_jump"));
    if (const std::string* v = ini.find("process", "sigma2_jump"))
        c.process.sigma2_jump = to_double(*v);
    if (const std::string* v = ini.find("process", "dt")) c.process.dt = to_double(*v);
    if (const std::string* v = ini.find("process", "floor")) c.process.floor = to_double(*v);

    c.y_domain = parse_interval(ini.get_or("grid", "y_domain", "0:20"));
    if (const std::string* v = ini.find("grid", "x0_segments")) c.x0_segments = parse_segments(*v);
    c.apriori_n_y = std::stoull(ini.get_or("grid", "n_y", "6"));
    c.lattice_generator = std::stoull(ini.get_or("grid", "lattice_generator", "1"));
    c.apriori_candidates = ini.get_or("grid", "candidates", "bangbang");

    if (const std::string* v = ini.find("basis", "y_edges")) {
        c.basis.y_edges = parse_double_list(*v);
        c.basis.x_edges = parse_double_list(ini.get("basis", "x_edges"));
        c.basis.monomials = parse_monomials(ini.get("basis", "monomials"));
        c.basis.extra_x_row = std::stoi(ini.get_or("basis", "extra_x_row", "-1"));
        if (const std::string* e = ini.find("basis", "extra_monomials"))
            c.basis.extra_monomials = parse_monomials(*e);
    }

    const std::string impl = ini.get_or("dual", "impl", "curve_fit");
    require(impl == "curve_fit" || impl == "table", "config: dual impl must be curve_fit|table");
    c.dual_impl = impl == "table" ? DualImpl::table : DualImpl::curve_fit;
    c.dual_n_y = std::stoull(ini.get_or("dual", "n_y", "320"));
    c.dual_n_h = std::stoi(ini.get_or("dual", "n_h", "33"));
    if (const std::string* v = ini.find("dual", "phi_y_edges")) c.phi_edges = parse_double_list(*v);
    c.phi_degree = std::stoi(ini.get_or("dual", "phi_degree", "3"));
    c.dual_paths = std::stoull(ini.get_or("dual", "n_paths", "10000"));
    const std::string mode = ini.get_or("dual", "mode", "regressed");
    require(mode == "regressed" || mode == "nested", "config: dual mode must be regressed|nested");
    c.cont_mode = mode == "nested" ? ContinuationMode::nested : ContinuationMode::regressed;
    c.nested_l = std::stoull(ini.get_or("dual", "nested_l", "64"));

    if (const std::string* v = ini.find("report", "x0")) c.x0_values = parse_double_list(*v);
    c.y0_grid = parse_linspace(ini.get_or("report", "y0_grid", "0:20:21"));

    c.policy_paths = std::stoull(ini.get_or("policy", "n_paths", "50000"));
    c.oracle_chain_paths = std::stoull(ini.get_or("oracle", "chain_paths", "64"));

    c.master_seed = std::stoull(ini.get("run", "master_seed"));
    return c;
}

ControlProblem RunConfig::build_problem() const {
    if (problem_kind == "gas") return make_gas_problem(gas);
    if (problem_kind == "swing")
        return swing_instance(swing.strike, swing.m_daily, swing.M_daily, swing.cum_min,
                              swing.cum_max, swing.horizon);
    throw std::invalid_argument("config: problem kind '" + problem_kind +
                                "' has no simulated pipeline");
}

std::shared_ptr<const PatchBasis> RunConfig::build_basis() const {
    require(!basis.y_edges.empty(), "config: [basis] section is required for this run");
    return std::make_shared<const PatchBasis>(basis.build());
}

std::shared_ptr<const PatchBasis> RunConfig::build_phi() const {
    return std::make_shared<const PatchBasis>(PatchBasis::y_cells(phi_edges, phi_degree));
}

CandidateRule RunConfig::apriori_rule() const {
    if (apriori_candidates == "bangbang") return CandidateRule::bang_bang();
    const std::string prefix = "refined:";
    if (apriori_candidates.rfind(prefix, 0) == 0)
        return CandidateRule::refined(std::stoi(apriori_candidates.substr(prefix.size())));
    throw std::invalid_argument("config: candidates must be bangbang or refined:<n>");
}

}  // namespace storeval
