#include "boltz/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "boltz/analytic.hpp"
#include "boltz/errors.hpp"
#include "boltz/hard_disks.hpp"
#include "boltz/stats.hpp"
#include "boltz/text.hpp"

namespace boltz {

namespace {

const std::map<std::string, std::set<std::string>> known_keys = {
    {"model",
     {"kind", "model", "dims", "q", "J", "h", "h_x", "h_y", "beta", "potential", "n", "dim", "L", "eta", "sigma",
      "epsilon", "k", "cutoff"}},
    {"sampler",
     {"kind", "scan", "xy_step", "eps_move", "max_attempts", "duration", "refresh", "refresh_rate", "refresh_interval",
      "lookahead"}},
    {"schedule", {"burn_in", "samples", "stride", "chains", "master_seed", "init"}},
    {"sweep", {"parameter", "values"}},
    {"output", {"directory", "snapshots"}},
};

const std::set<std::string> lattice_samplers = {"metropolis", "glauber", "swendsen_wang", "wolff", "ecmc_xy"};
const std::set<std::string> particle_samplers = {"hd_metropolis", "jaster", "md", "ecmc"};

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

bool parse_number(const std::string& text, double& out)
{
    const std::string t = trim(text);
    if (t.empty()) return false;
    auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size() && std::isfinite(out);
}

bool parse_unsigned(const std::string& text, std::uint64_t& out)
{
    const std::string t = trim(text);
    if (t.empty()) return false;
    auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

/// Typed access to the raw key map that records every problem instead of stopping.
class Reader {
public:
    Reader(const std::map<std::string, std::string>& raw, std::vector<std::string>& errors) : raw_(raw), errors_(errors) {}

    bool has(const std::string& key) const { return raw_.count(key) > 0; }
    void error(const std::string& key, const std::string& msg) { errors_.push_back(key + ": " + msg); }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    double real(const std::string& key, double fallback)
    {
        if (!has(key)) return fallback;
        double v;
        if (!parse_number(raw_.at(key), v)) {
            error(key, "expected a finite number, got '" + raw_.at(key) + "'");
            return fallback;
        }
        return v;
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key)) return fallback;
        std::uint64_t v;
        if (!parse_unsigned(raw_.at(key), v)) {
            error(key, "expected a non-negative integer, got '" + raw_.at(key) + "'");
            return fallback;
        }
        return v;
    }

    bool flag(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const std::string v = raw_.at(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        error(key, "expected true or false");
        return fallback;
    }

    void positive(const std::string& key, double v)
    {
        if (has(key) && !(v > 0)) error(key, "must be positive");
    }

private:
    const std::map<std::string, std::string>& raw_;
    std::vector<std::string>& errors_;
};

double ball_volume(int d, double s)
{
    const double pi = std::numbers::pi;
    return d == 1 ? 2 * s : d == 2 ? pi * s * s : 4.0 / 3.0 * pi * s * s * s;
}

double sigma_of(const Potential<double>& p)
{
    return std::visit(
        [](const auto& x) -> double {
            if constexpr (requires { x.sigma; }) return x.sigma;
            else return 0.0;
        },
        p);
}

/// Spec for one grid point.
LatticeSpec lattice_at(const ExperimentConfig& cfg, double parameter)
{
    LatticeSpec s = cfg.lattice_spec;
    if (cfg.sweep_parameter == "beta") s.beta = parameter;
    return s;
}

ParticleSpec<double> particles_at(const ExperimentConfig& cfg, double parameter)
{
    ParticleSpec<double> s = cfg.particle_spec;
    if (cfg.sweep_parameter == "beta") s.beta = parameter;
    std::optional<double> eta = cfg.eta;
    if (cfg.sweep_parameter == "eta") eta = parameter;
    if (eta) {
        const int d = s.dim();
        const double L = std::pow(s.n * ball_volume(d, sigma_of(s.potential)) / *eta, 1.0 / d);
        s.torus = Torus<double>::cube(d, L);
    }
    return s;
}

bool above_transition(const LatticeSpec& s)
{
    const double K = s.beta * s.J;
    switch (s.model) {
    case LatticeModel::Ising: return K > critical_coupling();
    case LatticeModel::Potts: return K > std::log(1 + std::sqrt(double(s.q)));
    case LatticeModel::XY: return K > 1.12;
    }
    return false;
}

LatticeConfig random_config(const Lattice& lat, Rng& rng)
{
    const auto& s = lat.spec();
    LatticeConfig c;
    c.spins.resize(static_cast<Eigen::Index>(lat.size()));
    for (Eigen::Index i = 0; i < c.spins.size(); ++i) {
        switch (s.model) {
        case LatticeModel::Ising: c.spins[i] = rng.coin(0.5) ? 1.0 : -1.0; break;
        case LatticeModel::Potts: c.spins[i] = 1.0 + static_cast<double>(rng.index(static_cast<std::size_t>(s.q))); break;
        case LatticeModel::XY: c.spins[i] = rng.uniform(0, 2 * std::numbers::pi); break;
        }
    }
    return c;
}

void run_lattice(const ExperimentConfig& cfg, const PlannedRun& run, ChainOutcome& out)
{
    const Lattice lat(lattice_at(cfg, run.parameter));
    const bool xy = lat.spec().model == LatticeModel::XY;
    LatticeChainState st{LatticeConfig{}, Rng(run.seed), 0.0};
    const bool ordered = cfg.init == InitialState::Ordered || (cfg.init == InitialState::Auto && above_transition(lat.spec()));
    st.config = ordered ? ordered_config(lat) : random_config(lat, st.rng);
    XYEventChainState chain;
    const double duration = cfg.duration > 0 ? cfg.duration : static_cast<double>(lat.size());
    const bool cluster = cfg.sampler == "wolff" || cfg.sampler == "swendsen_wang";

    std::size_t last = 0;
    auto step = [&] {
        if (cfg.sampler == "metropolis") last = metropolis_sweep(st, lat, cfg.single_site);
        else if (cfg.sampler == "glauber") last = glauber_sweep(st, lat, cfg.single_site);
        else if (cfg.sampler == "swendsen_wang") last = swendsen_wang_step(st, lat);
        else if (cfg.sampler == "wolff") last = wolff_step(st, lat);
        else ecmc_xy_run(st, chain, lat, duration);
    };

    std::ostringstream os;
    os << "time,energy,m" << (xy ? ",m_y" : "") << (cluster ? ",cluster_size" : "") << '\n';
    out.series_csv = os.str();
    out.start_time = st.time;
    for (std::size_t k = 0; k < cfg.burn_in * cfg.stride; ++k) step();
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        for (std::size_t k = 0; k < cfg.stride; ++k) step();
        const Eigen::Vector2d m = magnetic_density(st.config, lat);
        std::string row = format_double(st.time) + ',' + format_double(lattice_energy(st.config, lat)) + ',' +
                          format_double(m[0]);
        if (xy) row += ',' + format_double(m[1]);
        if (cluster) row += ',' + std::to_string(last);
        out.series_csv += row + '\n';
        out.end_time = st.time;
    }
}

void run_particles(const ExperimentConfig& cfg, const PlannedRun& run, ChainOutcome& out)
{
    const ParticleSpec<double> spec = particles_at(cfg, run.parameter);
    spec.validate();
    Rng rng(run.seed);
    Positions x = hexagonal_start(spec);
    const double duration = cfg.duration > 0 ? cfg.duration : 1.0;
    const int d = spec.dim();

    MdState md;
    ECMCState ec;
    if (cfg.sampler == "md") {
        md.positions = x;
        md.velocities.resize(d, spec.n);
        for (int i = 0; i < spec.n; ++i)
            for (int k = 0; k < d; ++k) md.velocities(k, i) = rng.normal() / std::sqrt(spec.beta * spec.mass(i));
    } else if (cfg.sampler == "ecmc") {
        ec.positions = x;
        ec.active = static_cast<int>(rng.index(static_cast<std::size_t>(spec.n)));
        ec.u = initial_direction(d, cfg.ecmc.refresh.mode, rng);
    }
    double sweeps = 0;
    auto step = [&] {
        if (cfg.sampler == "hd_metropolis") {
            for (int k = 0; k < spec.n; ++k) hard_disk_metropolis_step(x, spec, cfg.eps_move, rng);
            sweeps += 1;
        } else if (cfg.sampler == "jaster") {
            for (int k = 0; k < spec.n; ++k) jaster_step(x, spec, cfg.eps_move, cfg.max_attempts, rng);
            sweeps += 1;
        } else if (cfg.sampler == "md") {
            md_advance(md, spec, duration);
        } else if (spec.is_hard_disk()) {
            ecmc_hard_disk_run(ec, spec, duration, cfg.ecmc.refresh, rng);
        } else {
            ecmc_smooth_run(ec, spec, duration, cfg.ecmc, rng);
        }
    };
    auto current = [&]() -> const Positions& {
        return cfg.sampler == "md" ? md.positions : cfg.sampler == "ecmc" ? ec.positions : x;
    };
    auto now = [&] { return cfg.sampler == "md" ? md.time : cfg.sampler == "ecmc" ? ec.time : sweeps; };

    out.series_csv = "time,energy\n";
    if (cfg.snapshots) {
        out.snapshot_csv = "sample,particle";
        for (int k = 0; k < d; ++k) out.snapshot_csv += std::string(",") + "xyz"[k];
        out.snapshot_csv += '\n';
    }
    out.start_time = now();
    for (std::size_t k = 0; k < cfg.burn_in * cfg.stride; ++k) step();
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        for (std::size_t k = 0; k < cfg.stride; ++k) step();
        const Positions& p = current();
        const Energy<double> e = total_energy(p, spec);
        if (e.is_forbidden()) throw InvalidState("sampler produced an overlapping configuration");
        out.series_csv += format_double(now()) + ',' + format_double(e.value()) + '\n';
        if (cfg.snapshots)
            for (int i = 0; i < spec.n; ++i) {
                std::string row = std::to_string(s) + ',' + std::to_string(i);
                for (int k = 0; k < d; ++k) row += ',' + format_double(p(k, i));
                out.snapshot_csv += row + '\n';
            }
        out.end_time = now();
    }
}

std::map<std::string, std::string> read_key_values(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidInput("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Minimal CSV reader for files this harness wrote (numeric, unquoted).
std::map<std::string, std::vector<double>> read_columns(const std::filesystem::path& p)
{
    std::istringstream is(slurp(p));
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput(p.string() + " is empty");
    const auto names = split(line, ',');
    std::map<std::string, std::vector<double>> cols;
    for (const auto& n : names) cols[n];
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != names.size()) throw InvalidInput("ragged row in " + p.string());
        for (std::size_t k = 0; k < f.size(); ++k) {
            double v;
            if (!parse_number(f[k], v)) throw InvalidInput("bad number '" + f[k] + "' in " + p.string());
            cols[names[k]].push_back(v);
        }
    }
    return cols;
}

}  // namespace

TimeUnit ExperimentConfig::time_unit() const
{
    if (sampler == "wolff" || sampler == "swendsen_wang") return TimeUnit::WolffStep;
    if (sampler == "ecmc_xy" || sampler == "ecmc") return TimeUnit::EcmcEventTime;
    if (sampler == "md") return TimeUnit::MdTime;
    return TimeUnit::MetropolisSweep;
}

ParseResult parse_config(const std::string& text)
{
    ParseResult result;
    auto& errors = result.errors;
    ExperimentConfig cfg;

    std::string cleaned;
    {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            const std::string t = trim(line);
            if (!t.empty() && t[0] == '#') continue;
            cleaned += line + '\n';
        }
    }
    boost::property_tree::ptree tree;
    try {
        std::istringstream is(cleaned);
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        errors.push_back("syntax: line " + std::to_string(e.line()) + ": " + e.message());
        return result;
    }
    for (const auto& [section, body] : tree) {
        auto known = known_keys.find(section);
        if (known == known_keys.end()) {
            errors.push_back(section + ": unknown section");
            continue;
        }
        if (body.empty() && !body.data().empty()) {
            errors.push_back(section + ": key outside any section");
            continue;
        }
        for (const auto& [key, value] : body) {
            if (!known->second.count(key)) errors.push_back(section + "." + key + ": unknown key");
            else cfg.raw[section + "." + key] = trim(value.data());
        }
    }
    Reader r(cfg.raw, errors);

    // model
    const std::string kind = r.text("model.kind", "lattice");
    if (kind != "lattice" && kind != "particles") r.error("model.kind", "must be lattice or particles");
    cfg.lattice = kind != "particles";
    if (cfg.lattice) {
        auto& s = cfg.lattice_spec;
        try {
            s.model = lattice_model_from_string(r.text("model.model", "ising"));
        } catch (const Error& e) {
            r.error("model.model", e.what());
        }
        s.dims.clear();
        for (const auto& tok : split(r.text("model.dims", "16x16"), 'x')) {
            std::uint64_t v;
            if (!parse_unsigned(tok, v) || v < 1 || v > (1u << 20)) {
                r.error("model.dims", "expected sizes like 32x32");
                s.dims = {2};
                break;
            }
            s.dims.push_back(static_cast<int>(v));
        }
        s.q = static_cast<int>(r.count("model.q", s.model == LatticeModel::Potts ? 3 : 2));
        s.J = r.real("model.J", 1.0);
        s.h = r.real("model.h", 0.0);
        s.h_xy = {r.real("model.h_x", 0.0), r.real("model.h_y", 0.0)};
        s.beta = r.real("model.beta", 1.0);
        for (const char* k : {"model.potential", "model.n", "model.dim", "model.L", "model.eta", "model.sigma",
                              "model.epsilon", "model.k", "model.cutoff"})
            if (r.has(k)) r.error(k, "not a lattice model key");
        try {
            s.validate();
        } catch (const Error& e) {
            if (s.beta <= 0) r.error("model.beta", "must be positive");
            else r.error("model", e.what());
        }
    } else {
        auto& s = cfg.particle_spec;
        const int d = static_cast<int>(r.count("model.dim", 2));
        if (d < 1 || d > 3) r.error("model.dim", "must be 1, 2 or 3");
        s.n = static_cast<int>(r.count("model.n", 2));
        s.beta = r.real("model.beta", 1.0);
        const double sigma = r.real("model.sigma", 1.0);
        const std::string pot = r.text("model.potential", "hard_disk");
        std::optional<double> cutoff;
        if (r.has("model.cutoff")) cutoff = r.real("model.cutoff", 0);
        if (pot == "hard_disk") s.potential = HardDisk<double>{sigma};
        else if (pot == "soft_disk")
            s.potential = SoftDisk<double>{sigma, r.real("model.epsilon", 1.0), static_cast<int>(r.count("model.k", 12)), cutoff};
        else if (pot == "lennard_jones") s.potential = LennardJones<double>{sigma, r.real("model.epsilon", 1.0), cutoff};
        else r.error("model.potential", "must be hard_disk, soft_disk or lennard_jones");
        if (r.has("model.eta")) {
            cfg.eta = r.real("model.eta", 0.1);
            if (!(*cfg.eta > 0 && *cfg.eta < 1)) r.error("model.eta", "must lie in (0, 1)");
            if (r.has("model.L")) r.error("model.L", "give either L or eta, not both");
        }
        const double L = r.real("model.L", 10.0);
        r.positive("model.L", L);
        r.positive("model.sigma", sigma);
        if (!(s.beta > 0)) r.error("model.beta", "must be positive");
        if (d >= 1 && d <= 3 && L > 0) s.torus = Torus<double>::cube(d, L);
        for (const char* k : {"model.model", "model.dims", "model.q", "model.J", "model.h", "model.h_x", "model.h_y"})
            if (r.has(k)) r.error(k, "not a particle model key");
        if (errors.empty()) try {
                s.validate();
            } catch (const Error& e) {
                r.error("model", e.what());
            }
    }

    // sampler
    cfg.sampler = r.text("sampler.kind", cfg.lattice ? "metropolis" : "hd_metropolis");
    if (cfg.lattice && !lattice_samplers.count(cfg.sampler))
        r.error("sampler.kind", "'" + cfg.sampler + "' is not a lattice sampler");
    if (!cfg.lattice && !particle_samplers.count(cfg.sampler))
        r.error("sampler.kind", "'" + cfg.sampler + "' is not a particle sampler");
    if (!cfg.lattice && cfg.sampler != "ecmc" && !std::holds_alternative<HardDisk<double>>(cfg.particle_spec.potential))
        r.error("sampler.kind", "only ecmc handles smooth potentials");
    const std::string scan = r.text("sampler.scan", "random");
    if (scan == "random") cfg.single_site.scan = ScanOrder::Random;
    else if (scan == "systematic") cfg.single_site.scan = ScanOrder::Systematic;
    else r.error("sampler.scan", "must be random or systematic");
    cfg.single_site.xy_step = r.real("sampler.xy_step", 1.0);
    r.positive("sampler.xy_step", cfg.single_site.xy_step);
    cfg.eps_move = r.real("sampler.eps_move", 0.1);
    r.positive("sampler.eps_move", cfg.eps_move);
    cfg.max_attempts = static_cast<int>(r.count("sampler.max_attempts", 1000));
    cfg.duration = r.real("sampler.duration", 0.0);
    r.positive("sampler.duration", cfg.duration);
    const std::string refresh = r.text("sampler.refresh", "uniform");
    if (refresh == "uniform") cfg.ecmc.refresh.mode = RefreshMode::Uniform;
    else if (refresh == "xy_fixed") cfg.ecmc.refresh.mode = RefreshMode::XYFixed;
    else if (refresh == "xy_poisson") cfg.ecmc.refresh.mode = RefreshMode::XYPoisson;
    else r.error("sampler.refresh", "must be uniform, xy_fixed or xy_poisson");
    cfg.ecmc.refresh.rate = r.real("sampler.refresh_rate", 1.0);
    r.positive("sampler.refresh_rate", cfg.ecmc.refresh.rate);
    cfg.ecmc.refresh.interval = r.real("sampler.refresh_interval", 1.0);
    r.positive("sampler.refresh_interval", cfg.ecmc.refresh.interval);
    cfg.ecmc.lookahead = r.real("sampler.lookahead", 0.0);
    r.positive("sampler.lookahead", cfg.ecmc.lookahead);

    // schedule
    cfg.burn_in = r.count("schedule.burn_in", 0);
    cfg.samples = r.count("schedule.samples", 1);
    cfg.stride = r.count("schedule.stride", 1);
    cfg.chains = r.count("schedule.chains", 1);
    if (cfg.samples < 1) r.error("schedule.samples", "must be at least 1");
    if (cfg.stride < 1) r.error("schedule.stride", "must be at least 1");
    if (cfg.chains < 1) r.error("schedule.chains", "must be at least 1");
    if (!r.has("schedule.master_seed")) r.error("schedule.master_seed", "required");
    cfg.master_seed = r.count("schedule.master_seed", 0);
    const std::string init = r.text("schedule.init", "auto");
    if (init == "auto") cfg.init = InitialState::Auto;
    else if (init == "ordered") cfg.init = InitialState::Ordered;
    else if (init == "disordered") cfg.init = InitialState::Disordered;
    else r.error("schedule.init", "must be auto, ordered or disordered");

    // sweep
    cfg.sweep_parameter = r.text("sweep.parameter", "");
    if (!cfg.sweep_parameter.empty()) {
        if (cfg.sweep_parameter != "beta" && cfg.sweep_parameter != "eta")
            r.error("sweep.parameter", "must be beta or eta");
        if (cfg.sweep_parameter == "eta" && cfg.lattice) r.error("sweep.parameter", "eta applies to particle models");
        if (!r.has("sweep.values")) r.error("sweep.values", "required with sweep.parameter");
        else try {
                cfg.sweep_values = parse_grid(r.text("sweep.values", ""));
                for (double v : cfg.sweep_values)
                    if (!(v > 0) || (cfg.sweep_parameter == "eta" && !(v < 1))) {
                        r.error("sweep.values", "value " + format_double(v) + " out of range");
                        break;
                    }
            } catch (const Error& e) {
                r.error("sweep.values", e.what());
            }
    } else if (r.has("sweep.values")) {
        r.error("sweep.parameter", "required with sweep.values");
    }

    // output
    cfg.directory = r.text("output.directory", "out");
    cfg.snapshots = r.flag("output.snapshots", false);

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto f = split(text, ':');
        double a, b;
        std::uint64_t n;
        if (f.size() != 3 || !parse_number(f[0], a) || !parse_number(f[1], b) || !parse_unsigned(f[2], n) || n < 1)
            throw InvalidInput("expected start:stop:count");
        if (n == 1) return {a};
        for (std::uint64_t k = 0; k < n; ++k) out.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
        return out;
    }
    for (const auto& tok : split(text, ',')) {
        double v;
        if (!parse_number(tok, v)) throw InvalidInput("bad grid value '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("empty grid");
    return out;
}

std::string config_from_manifest(const std::string& manifest_text)
{
    std::map<std::string, std::map<std::string, std::string>> sections;
    for (const auto& [k, v] : read_key_values(manifest_text)) {
        if (k.rfind("config.", 0) != 0) continue;
        const auto rest = k.substr(7);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) continue;
        sections[rest.substr(0, dot)][rest.substr(dot + 1)] = v;
    }
    std::string ini;
    for (const auto& [sec, keys] : sections) {
        ini += "[" + sec + "]\n";
        for (const auto& [k, v] : keys) ini += k + " = " + v + "\n";
    }
    return ini;
}

std::vector<PlannedRun> plan_runs(const ExperimentConfig& cfg)
{
    std::vector<PlannedRun> runs;
    for (std::size_t g = 0; g < cfg.grid_size(); ++g) {
        double p;
        if (!cfg.sweep_values.empty()) p = cfg.sweep_values[g];
        else if (cfg.lattice) p = cfg.lattice_spec.beta;
        else p = cfg.particle_spec.beta;
        for (std::size_t c = 0; c < cfg.chains; ++c)
            runs.push_back({g, c, p, seed_split(cfg.master_seed, static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(c))});
    }
    return runs;
}

ChainOutcome run_chain(const ExperimentConfig& cfg, const PlannedRun& run)
{
    ChainOutcome out;
    out.run = run;
    try {
        if (cfg.lattice) run_lattice(cfg, run, out);
        else run_particles(cfg, run, out);
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

std::string series_file_name(std::size_t g, std::size_t c)
{
    return "series_g" + std::to_string(g) + "_c" + std::to_string(c) + ".csv";
}

std::string snapshot_file_name(std::size_t g, std::size_t c)
{
    return "snapshots_g" + std::to_string(g) + "_c" + std::to_string(c) + ".csv";
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

RunManifest run_experiment(const ExperimentConfig& cfg, unsigned workers)
{
    if (workers == 0) {
        workers = 1;
        if (const char* env = std::getenv("BOLTZ_WORKERS")) {
            std::uint64_t w;
            if (!parse_unsigned(env, w) || w < 1) throw InvalidInput("BOLTZ_WORKERS must be a positive integer");
            workers = static_cast<unsigned>(w);
        }
    }
    const auto runs = plan_runs(cfg);
    std::vector<ChainOutcome> outcomes(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < runs.size();) outcomes[k] = run_chain(cfg, runs[k]);
    };
    const unsigned n_threads = std::min<std::size_t>(workers, runs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::filesystem::create_directories(cfg.directory);
    std::string canonical;
    for (const auto& [k, v] : cfg.raw) canonical += k + "=" + v + "\n";
    std::ostringstream m;
    m << "# boltz manifest\n";
    m << "software_version=" << software_version << '\n';
    m << "config_hash=" << std::hex << fnv1a(canonical) << std::dec << '\n';
    m << "master_seed=" << cfg.master_seed << '\n';
    m << "seed_rule=mix64(((grid << 32) | chain) ^ mix64(master_seed))\n";
    m << "grid_points=" << cfg.grid_size() << '\n';
    m << "chains=" << cfg.chains << '\n';
    m << "planned_runs=" << runs.size() << '\n';
    m << "time_unit=" << to_string(cfg.time_unit()) << '\n';
    m << "sweep_parameter=" << (cfg.sweep_parameter.empty() ? "none" : cfg.sweep_parameter) << '\n';
    if (cfg.lattice) m << "sites=" << cfg.lattice_spec.size() << '\n';
    for (const auto& [k, v] : cfg.raw) m << "config." << k << '=' << v << '\n';
    for (const auto& o : outcomes) {
        const std::string key = "run." + std::to_string(o.run.grid_index) + "." + std::to_string(o.run.chain) + ".";
        const double beta = cfg.lattice ? lattice_at(cfg, o.run.parameter).beta : particles_at(cfg, o.run.parameter).beta;
        m << key << "parameter=" << format_double(o.run.parameter) << '\n';
        m << key << "beta=" << format_double(beta) << '\n';
        m << key << "seed=" << o.run.seed << '\n';
        m << key << "status=" << (o.ok ? "ok" : "failed: " + o.error) << '\n';
        m << key << "start=" << format_double(o.start_time) << '\n';
        m << key << "end=" << format_double(o.end_time) << '\n';
        m << key << "series=" << series_file_name(o.run.grid_index, o.run.chain) << '\n';
        std::ofstream(cfg.directory / series_file_name(o.run.grid_index, o.run.chain), std::ios::binary) << o.series_csv;
        if (!o.snapshot_csv.empty())
            std::ofstream(cfg.directory / snapshot_file_name(o.run.grid_index, o.run.chain), std::ios::binary)
                << o.snapshot_csv;
    }
    RunManifest result{m.str(), std::move(outcomes)};
    std::ofstream(cfg.directory / "manifest.txt", std::ios::binary) << result.text;
    return result;
}

std::string analyze(const std::filesystem::path& dir, const std::string& observable)
{
    static const std::set<std::string> supported = {"energy", "abs_m", "specific_heat", "iat_abs_m", "pressure"};
    if (!supported.count(observable)) throw InvalidInput("unknown observable '" + observable + "'");
    const auto kv = read_key_values(slurp(dir / "manifest.txt"));
    auto get = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw InvalidInput("manifest lacks " + k);
        return it->second;
    };
    const std::size_t grid = std::stoul(get("grid_points")), chains = std::stoul(get("chains"));
    const std::string unit = get("time_unit");
    std::optional<ExperimentConfig> cfg;
    if (observable == "pressure") {
        auto parsed = parse_config(config_from_manifest(slurp(dir / "manifest.txt")));
        if (!parsed.config) throw InvalidInput("manifest configuration does not parse");
        cfg = std::move(parsed.config);
        if (cfg->lattice || !cfg->particle_spec.is_hard_disk()) throw InvalidInput("pressure needs a hard-disk run");
    }
    const double sites = kv.count("sites") ? std::stod(get("sites")) : 1.0;

    std::string out = "run,parameter,observable,value,stderr,time_unit,n_chains\n";
    for (std::size_t g = 0; g < grid; ++g) {
        std::vector<double> est;
        std::vector<std::vector<Positions>> ensembles;
        double single_err = std::numeric_limits<double>::quiet_NaN();
        std::string parameter;
        for (std::size_t c = 0; c < chains; ++c) {
            const std::string key = "run." + std::to_string(g) + "." + std::to_string(c) + ".";
            parameter = get(key + "parameter");
            if (get(key + "status") != "ok") continue;
            if (observable == "pressure") {
                const auto cols = read_columns(dir / snapshot_file_name(g, c));
                const auto spec = particles_at(*cfg, std::stod(parameter));
                const auto& sample = cols.at("sample");
                std::vector<Positions> configs;
                for (std::size_t row = 0; row < sample.size(); row += static_cast<std::size_t>(spec.n)) {
                    Positions p(spec.dim(), spec.n);
                    for (int i = 0; i < spec.n; ++i)
                        for (int k = 0; k < spec.dim(); ++k) p(k, i) = cols.at(std::string(1, "xyz"[k]))[row + i];
                    configs.push_back(std::move(p));
                }
                ensembles.push_back(std::move(configs));
                continue;
            }
            const auto cols = read_columns(dir / get(key + "series"));
            const auto& e = cols.at("energy");
            std::vector<double> absm(e.size());
            if (cols.count("m")) {
                const auto& mx = cols.at("m");
                for (std::size_t i = 0; i < e.size(); ++i)
                    absm[i] = cols.count("m_y") ? std::hypot(mx[i], cols.at("m_y")[i]) : std::abs(mx[i]);
            }
            const double beta = std::stod(get(key + "beta"));
            if (observable == "energy") {
                est.push_back(mean_error(e).mean / sites);
                if (chains == 1 && e.size() >= 40) single_err = batch_means(e, 20).stderr_ / sites;
            } else if (observable == "abs_m") {
                if (!cols.count("m")) throw InvalidInput("series has no magnetization");
                est.push_back(mean_error(absm).mean);
                if (chains == 1 && absm.size() >= 40) single_err = batch_means(absm, 20).stderr_;
            } else if (observable == "specific_heat") {
                est.push_back(specific_heat_estimate(ObservableSeries{e, TimeUnit::MetropolisSweep, 0}, beta) / sites);
            } else {
                if (!cols.count("m")) throw InvalidInput("series has no magnetization");
                const auto& t = cols.at("time");
                const double spacing = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
                est.push_back(integrated_autocorrelation_time(absm) * spacing);
            }
        }
        double value = std::numeric_limits<double>::quiet_NaN(), err = single_err;
        std::size_t used = est.size();
        if (observable == "pressure") {
            if (ensembles.empty()) continue;
            const auto pe = pressure_estimate(ensembles, particles_at(*cfg, std::stod(parameter)));
            value = pe.beta_p;
            err = ensembles.size() >= 2 ? pe.stderr_ : std::numeric_limits<double>::quiet_NaN();
            used = ensembles.size();
        } else {
            if (est.empty()) continue;
            double s = 0;
            for (double v : est) s += v;
            value = s / static_cast<double>(est.size());
            if (est.size() >= 2) err = mean_error(est).stderr_;
        }
        out += std::to_string(g) + ',' + csv_field(parameter) + ',' + observable + ',' + format_double(value) + ',' +
               (std::isnan(err) ? std::string() : format_double(err)) + ',' +
               (observable == "pressure" ? std::string("none") : unit) + ',' + std::to_string(used) + '\n';
    }
    return out;
}

std::string reference_curve(const std::string& curve, const std::vector<double>& grid, int n, double J, double h)
{
    std::string out;
    const double bc = critical_coupling();
    if (curve == "onsager_c") {
        out = "beta_c_over_beta,beta,specific_heat\n";
        for (double x : grid) {
            if (!(x > 0)) throw InvalidInput("grid values must be positive");
            const double K = bc / x;
            std::string c;
            try {
                const auto v = onsager_specific_heat(K);
                if (!v.near_singular) c = format_double(v.value);
            } catch (const Singularity&) {
            }
            out += format_double(x) + ',' + format_double(K) + ',' + c + '\n';
        }
    } else if (curve == "m0") {
        out = "beta_c_over_beta,beta,spontaneous_m\n";
        for (double x : grid) {
            if (!(x > 0)) throw InvalidInput("grid values must be positive");
            const double K = bc / x;
            out += format_double(x) + ',' + format_double(K) + ',' + format_double(spontaneous_magnetization(K)) + '\n';
        }
    } else if (curve == "ising1d_f") {
        out = "beta,free_energy_per_site\n";
        for (double b : grid)
            out += format_double(b) + ',' + format_double(ising1d_free_energy(b, J, h, n).per_particle_free_energy) + '\n';
    } else {
        throw InvalidInput("unknown curve '" + curve + "'");
    }
    return out;
}

}  // namespace boltz
