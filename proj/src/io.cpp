#include "nsk/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nsk/error.hpp"

namespace nsk {

namespace fs = std::filesystem;

namespace {

constexpr char magic[4] = {'N', 'S', 'K', 'F'};
constexpr std::uint32_t snapshot_version = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const fs::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigurationError("truncated snapshot " + path.string());
    return v;
}

double number(const json& j, const char* key, const std::string& where, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return infinity;
    if (!v.is_number()) throw ConfigurationError(where + "." + key + ": expected a number");
    return v.get<double>();
}

double required_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigurationError(where + "." + key + ": missing required field");
    return number(j, key, where, 0.0);
}

std::vector<double> number_list(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigurationError(where + "." + key + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigurationError(where + "." + key + ": expected a list of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

void check_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigurationError(where + ": expected an object");
}

}  // namespace

void write_snapshot(const fs::path& path, const State& s, double t) {
    const GridSpec& g = s.grid();
    std::ostringstream os(std::ios::binary);
    os.write(magic, 4);
    put(os, snapshot_version);
    put(os, static_cast<std::int32_t>(g.dim));
    put(os, static_cast<std::int32_t>(g.points));
    put(os, g.length);
    put(os, t);
    put(os, static_cast<std::int32_t>(1 + g.dim));
    for (const auto& c : s.a.data()) {
        put(os, c.real());
        put(os, c.imag());
    }
    for (const auto& c : s.m.data()) {
        put(os, c.real());
        put(os, c.imag());
    }
    write_text_atomic(path, os.str());
}

std::pair<State, double> read_snapshot(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigurationError("cannot open snapshot " + path.string());
    char head[4];
    if (!is.read(head, 4) || std::memcmp(head, magic, 4) != 0) throw ConfigurationError("not an .nskf snapshot: " + path.string());
    const auto version = get<std::uint32_t>(is, path);
    if (version != snapshot_version) throw ConfigurationError("unsupported snapshot version in " + path.string());
    GridSpec g;
    g.dim = get<std::int32_t>(is, path);
    g.points = get<std::int32_t>(is, path);
    g.length = get<double>(is, path);
    g.validate();
    const double t = get<double>(is, path);
    const auto comps = get<std::int32_t>(is, path);
    if (comps != 1 + g.dim) throw ConfigurationError("snapshot component count mismatch in " + path.string());
    State s = State::zero(g);
    for (auto& c : s.a.data()) {
        const double re = get<double>(is, path);
        c = Complex(re, get<double>(is, path));
    }
    for (auto& c : s.m.data()) {
        const double re = get<double>(is, path);
        c = Complex(re, get<double>(is, path));
    }
    return {std::move(s), t};
}

void write_field_csv(const fs::path& path, const SpectralField& f) {
    std::ostringstream os;
    os << std::setprecision(17);
    const GridSpec& g = f.grid();
    os << "# grid dim=" << g.dim << " points=" << g.points << " length=" << g.length << " components=" << f.components()
       << "\n";
    os << "k1,k2,k3,component,re,im\n";
    for_each_mode(g, [&](std::size_t idx, const Wavevector& w) {
        for (int c = 0; c < f.components(); ++c) {
            const Complex v = f.at(c, idx);
            if (v == Complex{}) continue;
            os << w.k[0] << ',' << w.k[1] << ',' << w.k[2] << ',' << c << ',' << v.real() << ',' << v.imag() << '\n';
        }
    });
    write_text_atomic(path, os.str());
}

SpectralField read_field_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigurationError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    GridSpec g;
    int comps = 0;
    if (std::sscanf(line.c_str(), "# grid dim=%d points=%d length=%lf components=%d", &g.dim, &g.points, &g.length,
                    &comps) != 4)
        throw ConfigurationError("missing grid header in " + path.string());
    g.validate();
    SpectralField f(g, comps);
    std::getline(is, line);
    const auto n = static_cast<long>(g.points);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        long k[3];
        int c = 0;
        double re = 0, im = 0;
        if (std::sscanf(line.c_str(), "%ld,%ld,%ld,%d,%lf,%lf", &k[0], &k[1], &k[2], &c, &re, &im) != 6)
            throw ConfigurationError("malformed row in " + path.string() + ": " + line);
        std::size_t idx = 0;
        for (int a = 0; a < g.dim; ++a) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>((k[a] + n) % n);
        f.at(c, idx) = Complex(re, im);
    }
    return f;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigurationError("cannot write " + tmp.string());
        os << content;
        if (!os) throw ConfigurationError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigurationError("cannot open " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

json to_json(const GridSpec& g) { return {{"dim", g.dim}, {"points_per_axis", g.points}, {"box_length", g.length}}; }

GridSpec grid_from_json(const json& j, const std::string& where) {
    check_object(j, where);
    GridSpec g;
    g.dim = static_cast<int>(number(j, "dim", where, g.dim));
    g.points = static_cast<int>(number(j, "points_per_axis", where, g.points));
    g.length = number(j, "box_length", where, g.length);
    try {
        g.validate();
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(where + ": " + e.what());
    }
    return g;
}

json to_json(const PhysParams& p) {
    json j;
    j["rho_star"] = p.rho_star;
    j["closures"] = {{"pressure", p.pressure.coeffs}, {"mu", p.mu.coeffs}, {"lambda", p.lambda.coeffs},
                     {"kappa", p.kappa.coeffs}};
    j["derived"] = {{"mu_bar", p.mu_bar()},       {"lambda_bar", p.lambda_bar()}, {"kappa_bar", p.kappa_bar()},
                    {"kappa_check", p.kappa_check()}, {"nu_bar", p.nu_bar()},     {"regime", to_string(p.regime())}};
    if (p.regime() != Regime::oscillatory) {
        j["derived"]["alpha_minus"] = make_alpha(p, AlphaBranch::minus).value;
        j["derived"]["alpha_plus"] = make_alpha(p, AlphaBranch::plus).value;
    }
    return j;
}

PhysParams params_from_json(const json& j, const std::string& where) {
    check_object(j, where);
    const double rho = number(j, "rho_star", where, 1.0);
    PhysParams p;
    if (j.contains("closures")) {
        const json& c = j.at("closures");
        check_object(c, where + ".closures");
        const std::string w = where + ".closures";
        p.rho_star = rho;
        p.pressure.coeffs = number_list(c, "pressure", w);
        p.mu.coeffs = number_list(c, "mu", w);
        p.lambda.coeffs = number_list(c, "lambda", w);
        p.kappa.coeffs = number_list(c, "kappa", w);
        if (p.mu.coeffs.empty() || p.kappa.coeffs.empty())
            throw ConfigurationError(w + ": mu and kappa closures need at least one coefficient");
    } else {
        p = PhysParams::from_scaled(required_number(j, "mu_bar", where), required_number(j, "lambda_bar", where),
                                    required_number(j, "kappa_bar", where), rho);
    }
    try {
        p.validate();
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(where + ": " + e.what());
    }
    return p;
}

json to_json(const StepperConfig& c) {
    return {{"dt", c.dt},
            {"scheme", to_string(c.scheme)},
            {"dealias", c.dealias},
            {"nonlinear", c.nonlinear},
            {"t_end", c.t_end},
            {"sample_times", c.sample_times},
            {"stability_constant", c.stability_constant},
            {"vacuum_threshold", c.vacuum_threshold}};
}

StepperConfig stepper_from_json(const json& j, const std::string& where) {
    check_object(j, where);
    StepperConfig c;
    c.dt = number(j, "dt", where, c.dt);
    if (j.contains("scheme")) {
        if (!j.at("scheme").is_string()) throw ConfigurationError(where + ".scheme: expected a string");
        try {
            c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        } catch (const ConfigurationError& e) {
            throw ConfigurationError(where + ".scheme: " + e.what());
        }
    }
    if (j.contains("dealias")) c.dealias = j.at("dealias").get<bool>();
    if (j.contains("nonlinear")) c.nonlinear = j.at("nonlinear").get<bool>();
    c.t_end = number(j, "t_end", where, c.t_end);
    c.sample_times = number_list(j, "sample_times", where);
    c.stability_constant = number(j, "stability_constant", where, c.stability_constant);
    c.vacuum_threshold = number(j, "vacuum_threshold", where, c.vacuum_threshold);
    try {
        c.validate();
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(where + ": " + e.what());
    }
    return c;
}

json to_json(const DecayExperiment& e) {
    return {{"sigma1", e.sigma1},
            {"q", e.q},
            {"p", e.p},
            {"r", e.r},
            {"l_values", e.l_values},
            {"amplitude", e.amplitude},
            {"t0", e.t0},
            {"fit_window", {e.t_min, e.t_max}},
            {"samples_per_decade", e.samples_per_decade},
            {"xi_cut", e.xi_cut},
            {"seed", e.seed},
            {"mode", to_string(e.mode)}};
}

DecayExperiment experiment_from_json(const json& j, const std::string& where) {
    check_object(j, where);
    DecayExperiment e;
    e.sigma1 = number(j, "sigma1", where, e.sigma1);
    e.q = number(j, "q", where, e.q);
    e.p = number(j, "p", where, e.p);
    e.r = number(j, "r", where, e.r);
    if (j.contains("l_values")) e.l_values = number_list(j, "l_values", where);
    e.amplitude = number(j, "amplitude", where, e.amplitude);
    e.t0 = number(j, "t0", where, e.t0);
    if (j.contains("fit_window")) {
        const auto w = number_list(j, "fit_window", where);
        if (w.size() != 2) throw ConfigurationError(where + ".fit_window: expected [t_min, t_max]");
        e.t_min = w[0];
        e.t_max = w[1];
    }
    e.samples_per_decade = static_cast<int>(number(j, "samples_per_decade", where, e.samples_per_decade));
    e.xi_cut = number(j, "xi_cut", where, e.xi_cut);
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mode")) {
        if (!j.at("mode").is_string()) throw ConfigurationError(where + ".mode: expected a string");
        try {
            e.mode = decay_mode_from_string(j.at("mode").get<std::string>());
        } catch (const ConfigurationError& err) {
            throw ConfigurationError(where + ".mode: " + err.what());
        }
    }
    return e;
}

json to_json(const DecayFit& f) {
    return {{"slope", f.slope},         {"intercept", f.intercept}, {"residual", f.residual},
            {"predicted", f.predicted}, {"window", {f.t_min, f.t_max}}, {"samples", f.samples}};
}

TrajectoryArchive TrajectoryArchive::create(const fs::path& dir, const GridSpec& grid, const PhysParams& p,
                                            const StepperConfig& c, std::uint64_t seed) {
    fs::create_directories(dir);
    TrajectoryArchive ar;
    ar.dir_ = dir;
    ar.header_ = {{"format", "nsk-trajectory"}, {"version", 1},          {"grid", to_json(grid)},
                  {"params", to_json(p)},       {"config", to_json(c)}, {"seed", seed},
                  {"samples", json::array()}};
    ar.flush();
    return ar;
}

TrajectoryArchive TrajectoryArchive::open(const fs::path& dir) {
    TrajectoryArchive ar;
    ar.dir_ = dir;
    ar.header_ = read_json(dir / "trajectory.json");
    if (ar.header_.value("format", "") != "nsk-trajectory")
        throw ConfigurationError(dir.string() + ": not a trajectory archive");
    return ar;
}

void TrajectoryArchive::append(double t, const State& s) {
    std::ostringstream name;
    name << "sample_" << std::setw(5) << std::setfill('0') << header_["samples"].size() << ".nskf";
    write_snapshot(dir_ / name.str(), s, t);
    header_["samples"].push_back({{"t", t}, {"file", name.str()}});
    flush();
}

bool TrajectoryArchive::last(double& t, State& s) const {
    if (header_["samples"].empty()) return false;
    const auto& entry = header_["samples"].back();
    auto [state, time] = read_snapshot(dir_ / entry["file"].get<std::string>());
    s = std::move(state);
    t = time;
    return true;
}

void TrajectoryArchive::flush() const { write_text_atomic(dir_ / "trajectory.json", header_.dump(2) + "\n"); }

}  // namespace nsk
