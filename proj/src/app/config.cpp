#include "mcrd/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mcrd/errors.hpp"

namespace mcrd::app {

namespace {

// Reads keys out of one JSON object and remembers which ones were consumed.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (!obj_.contains(key)) return;
        seen_.insert(key);
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(out)) throw ConfigError(where(key) + " must be finite");
        }
    }

    template <typename T>
    void read_optional(const std::string& key, std::optional<T>& out) {
        if (!obj_.contains(key)) return;
        T value{};
        read(key, value);
        out = value;
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(obj_.at(key), where(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!seen_.count(item.key())) throw ConfigError("unknown key " + where(item.key()));
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

Axis read_axis(Section& parent, const std::string& key) {
    Axis axis;
    const json& node = parent.raw(key);
    const std::string name = parent.where(key);
    if (node.is_number()) {
        axis.values = {node.get<double>()};
    } else if (node.is_array()) {
        for (const auto& v : node) {
            require(v.is_number(), name + " entries must be numbers");
            axis.values.push_back(v.get<double>());
        }
    } else {
        Section s(node, name);
        double lo = 0.0, hi = 0.0;
        int count = 0;
        require(s.has("min") && s.has("max") && s.has("count"), name + " needs min, max and count");
        s.read("min", lo);
        s.read("max", hi);
        s.read("count", count);
        s.finish();
        require(count >= 1, name + ".count must be at least 1");
        for (int i = 0; i < count; ++i)
            axis.values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    }
    require(!axis.values.empty(), name + " must not be empty");
    for (double v : axis.values) require(std::isfinite(v), name + " entries must be finite");
    return axis;
}

json axis_json(const Axis& a) { return a.values; }

Scheme parse_scheme(const std::string& name) {
    if (name == "imex-euler") return Scheme::ImexEuler;
    if (name == "imex-cn") return Scheme::ImexCrankNicolson;
    throw ConfigError("stepper.scheme must be imex-euler or imex-cn, got " + name);
}

std::string scheme_name(Scheme s) { return s == Scheme::ImexEuler ? "imex-euler" : "imex-cn"; }

}  // namespace

ModelParams RunConfig::params() const { return derive_params(D, tau, alpha1, alpha2); }

GridPtr RunConfig::make_grid() const {
    return dim == 1 ? Grid::make_1d(n[0], length[0]) : Grid::make_2d(n[0], n[1], length[0], length[1]);
}

double RunConfig::resolve_lambda(const ModelParams& p, const Grid& grid) const {
    if (lambda) return *lambda;
    if (z_bar) return lambda_for_homogeneous(p, *z_bar, grid.volume());
    throw ConfigError("initial needs lambda or z_bar");
}

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    Section root(doc, "");
    root.read("mode", cfg.mode);
    if (!cfg.mode.empty()) {
        bool known = false;
        for (const auto& m : kModes) known = known || m == cfg.mode;
        require(known, "mode must be one of simulate, stationary, spectrum, sweep, limit-tau1, verify");
    }
    root.read("output_dir", cfg.output_dir);
    std::int64_t seed = 1;
    root.read("seed", seed);
    require(seed >= 0, "seed must be nonnegative");
    cfg.stepper.seed = static_cast<std::uint64_t>(seed);

    if (root.has("params")) {
        Section s = root.child("params");
        s.read("D", cfg.D);
        s.read("tau", cfg.tau);
        s.read("alpha1", cfg.alpha1);
        s.read("alpha2", cfg.alpha2);
        s.finish();
    }
    if (root.has("grid")) {
        Section s = root.child("grid");
        s.read("dim", cfg.dim);
        require(cfg.dim == 1 || cfg.dim == 2, "grid.dim must be 1 or 2");
        std::vector<int> n;
        std::vector<double> len;
        s.read("n", n);
        s.read("length", len);
        s.finish();
        require(n.empty() || static_cast<int>(n.size()) == cfg.dim, "grid.n needs one entry per axis");
        require(len.empty() || static_cast<int>(len.size()) == cfg.dim, "grid.length needs one entry per axis");
        for (std::size_t i = 0; i < n.size(); ++i) cfg.n[i] = n[i];
        for (std::size_t i = 0; i < len.size(); ++i) cfg.length[i] = len[i];
        for (int a = 0; a < cfg.dim; ++a) {
            require(cfg.n[a] >= 8, "grid.n must be at least 8 per axis");
            require(cfg.length[a] > 0.0, "grid.length must be positive");
        }
    }
    if (root.has("stepper")) {
        Section s = root.child("stepper");
        std::string scheme = scheme_name(cfg.stepper.scheme);
        s.read("dt", cfg.stepper.dt);
        s.read("scheme", scheme);
        s.read("t_end", cfg.stepper.t_end);
        s.read("output_every", cfg.stepper.output_every);
        s.read("perturbation", cfg.stepper.perturbation);
        s.read("settle_tol", cfg.stepper.settle_tol);
        s.finish();
        cfg.stepper.scheme = parse_scheme(scheme);
        require(cfg.stepper.dt > 0.0, "stepper.dt must be positive");
        require(cfg.stepper.t_end > 0.0, "stepper.t_end must be positive");
        require(cfg.stepper.output_every >= 1, "stepper.output_every must be at least 1");
        require(cfg.stepper.perturbation >= 0.0 && cfg.stepper.perturbation < 1.0,
                "stepper.perturbation must be in [0, 1)");
        require(cfg.stepper.settle_tol >= 0.0, "stepper.settle_tol must be nonnegative");
    }
    if (root.has("initial")) {
        Section s = root.child("initial");
        s.read_optional("lambda", cfg.lambda);
        s.read_optional("z_bar", cfg.z_bar);
        s.finish();
        require(!(cfg.lambda && cfg.z_bar), "initial takes lambda or z_bar, not both");
        require(!cfg.z_bar || *cfg.z_bar >= 0.0, "initial.z_bar must be nonnegative");
    }
    if (root.has("stationary")) {
        Section s = root.child("stationary");
        auto& st = cfg.stationary;
        s.read("guess", st.guess);
        s.read("amplitude", st.amplitude);
        s.read("relax_t_end", st.relax_t_end);
        s.read("settle_tol", st.settle_tol);
        s.read("tol", st.newton.tol);
        s.read("max_iter", st.newton.max_iter);
        s.read("damped", st.newton.damped);
        s.finish();
        require(st.guess == "dynamics" || st.guess == "cosine" || st.guess == "homogeneous",
                "stationary.guess must be dynamics, cosine or homogeneous");
        require(st.newton.tol > 0.0, "stationary.tol must be positive");
        require(st.newton.max_iter >= 1, "stationary.max_iter must be at least 1");
        require(st.relax_t_end > 0.0, "stationary.relax_t_end must be positive");
    }
    if (root.has("spectrum")) {
        Section s = root.child("spectrum");
        auto& sp = cfg.spectrum;
        s.read("state", sp.state);
        s.read("s_min", sp.s_min);
        s.read("s_max", sp.s_max);
        s.read("s_count", sp.s_count);
        s.read("j_max", sp.j_max);
        s.finish();
        require(sp.state == "stationary" || sp.state == "homogeneous",
                "spectrum.state must be stationary or homogeneous");
        require(sp.s_count >= 1, "spectrum.s_count must be at least 1");
        require(sp.s_max >= sp.s_min, "spectrum.s_max must not be below s_min");
        require(sp.j_max >= 1, "spectrum.j_max must be at least 1");
    }
    if (root.has("sweep")) {
        Section s = root.child("sweep");
        auto& sw = cfg.sweep;
        if (s.has("D")) sw.D = read_axis(s, "D");
        if (s.has("tau")) sw.tau = read_axis(s, "tau");
        if (s.has("z_bar")) sw.z_bar = read_axis(s, "z_bar");
        if (s.has("lambda")) sw.lambda = read_axis(s, "lambda");
        s.read("relax_t_end", sw.relax_t_end);
        s.read("pattern_tol", sw.pattern_tol);
        s.read("point_artifacts", sw.point_artifacts);
        s.finish();
        require(sw.relax_t_end > 0.0, "sweep.relax_t_end must be positive");
        require(sw.z_bar.values.empty() || sw.lambda.values.empty(), "sweep takes a z_bar or a lambda axis, not both");
    }
    if (root.has("limit")) {
        Section s = root.child("limit");
        auto& li = cfg.limit;
        s.read("lambda_hat", li.lambda_hat);
        s.read("amplitude", li.amplitude);
        s.read("relax_dt", li.relax_dt);
        s.read("relax_tol", li.relax_tol);
        s.read("relax_steps", li.relax_steps);
        s.finish();
        require(li.relax_dt > 0.0, "limit.relax_dt must be positive");
        require(li.relax_steps >= 0, "limit.relax_steps must be nonnegative");
    }
    if (root.has("verify")) {
        Section s = root.child("verify");
        s.read("n", cfg.verify.n);
        s.finish();
        require(cfg.verify.n >= 8, "verify.n must be at least 8");
    }
    root.finish();

    require(cfg.D > 0.0, "params.D must be positive");
    require(cfg.tau > 0.0, "params.tau must be positive");
    require(cfg.alpha1 > 0.0, "params.alpha1 must be positive");
    require(cfg.alpha2 > 0.0, "params.alpha2 must be positive");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json j;
    j["mode"] = cfg.mode;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.stepper.seed;
    j["params"] = {{"D", cfg.D}, {"tau", cfg.tau}, {"alpha1", cfg.alpha1}, {"alpha2", cfg.alpha2}};
    json n = json::array(), len = json::array();
    for (int a = 0; a < cfg.dim; ++a) {
        n.push_back(cfg.n[a]);
        len.push_back(cfg.length[a]);
    }
    j["grid"] = {{"dim", cfg.dim}, {"n", n}, {"length", len}};
    j["stepper"] = {{"dt", cfg.stepper.dt},
                    {"scheme", scheme_name(cfg.stepper.scheme)},
                    {"t_end", cfg.stepper.t_end},
                    {"output_every", cfg.stepper.output_every},
                    {"perturbation", cfg.stepper.perturbation},
                    {"settle_tol", cfg.stepper.settle_tol}};
    j["initial"] = json::object();
    if (cfg.lambda) j["initial"]["lambda"] = *cfg.lambda;
    if (cfg.z_bar) j["initial"]["z_bar"] = *cfg.z_bar;
    const auto& st = cfg.stationary;
    j["stationary"] = {{"guess", st.guess},         {"amplitude", st.amplitude}, {"relax_t_end", st.relax_t_end},
                       {"settle_tol", st.settle_tol}, {"tol", st.newton.tol},      {"max_iter", st.newton.max_iter},
                       {"damped", st.newton.damped}};
    const auto& sp = cfg.spectrum;
    j["spectrum"] = {{"state", sp.state}, {"s_min", sp.s_min}, {"s_max", sp.s_max}, {"s_count", sp.s_count},
                     {"j_max", sp.j_max}};
    const auto& sw = cfg.sweep;
    j["sweep"] = {{"relax_t_end", sw.relax_t_end}, {"pattern_tol", sw.pattern_tol}, {"point_artifacts", sw.point_artifacts}};
    if (!sw.D.values.empty()) j["sweep"]["D"] = axis_json(sw.D);
    if (!sw.tau.values.empty()) j["sweep"]["tau"] = axis_json(sw.tau);
    if (!sw.z_bar.values.empty()) j["sweep"]["z_bar"] = axis_json(sw.z_bar);
    if (!sw.lambda.values.empty()) j["sweep"]["lambda"] = axis_json(sw.lambda);
    const auto& li = cfg.limit;
    j["limit"] = {{"lambda_hat", li.lambda_hat}, {"amplitude", li.amplitude},   {"relax_dt", li.relax_dt},
                  {"relax_tol", li.relax_tol},   {"relax_steps", li.relax_steps}};
    j["verify"] = {{"n", cfg.verify.n}};
    return j;
}

}  // namespace mcrd::app
