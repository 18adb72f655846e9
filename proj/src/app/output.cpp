#include "mcrd/app/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"

namespace fs = std::filesystem;

namespace mcrd::app {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

ArtifactSet::ArtifactSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void ArtifactSet::write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    const std::string digest = sha256_hex(content);
    std::lock_guard<std::mutex> lock(mutex_);
    digests_[name] = digest;
}

void ArtifactSet::write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

json ArtifactSet::csv_digests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    json out = json::object();
    for (const auto& [name, digest] : digests_)
        if (fs::path(name).extension() == ".csv") out[name] = digest;
    return out;
}

std::string timeseries_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t,mass,min_u,min_v,L,J_lambda,grad_w_inf,z_t_norm\n";
    for (const auto& s : traj.snapshots) {
        out << fmt_double(s.t) << ',' << fmt_double(s.mass) << ',' << fmt_double(s.min_u) << ','
            << fmt_double(s.min_v) << ',' << fmt_double(s.lyapunov) << ',' << fmt_double(s.j_lambda) << ','
            << fmt_double(s.grad_w_inf) << ',' << fmt_double(s.z_t_norm) << '\n';
    }
    return out.str();
}

std::string fields_csv(const Field& u, const Field& v, const ModelParams& p) {
    const Grid& grid = u.grid();
    const auto [z, w] = to_zw(u, v, p);
    std::ostringstream out;
    out << (grid.dim() == 1 ? "x,u,v,z,w\n" : "x,y,u,v,z,w\n");
    for (int i = 0; i < grid.nodes(); ++i) {
        const auto pos = grid.position(i);
        out << fmt_double(pos[0]) << ',';
        if (grid.dim() == 2) out << fmt_double(pos[1]) << ',';
        out << fmt_double(u[i]) << ',' << fmt_double(v[i]) << ',' << fmt_double(z[i]) << ',' << fmt_double(w[i])
            << '\n';
    }
    return out.str();
}

namespace {

json complex_list(const std::vector<Complex>& v) {
    json out = json::array();
    for (const auto& c : v) out.push_back({c.real(), c.imag()});
    return out;
}

}  // namespace

json mu_curve_json(const MuCurve& curve) {
    json samples = json::array();
    for (const auto& s : curve.samples) samples.push_back({{"s", s.s}, {"j", s.j}, {"mu", s.mu}, {"rayleigh", s.rayleigh}});
    return {{"j_max", curve.j_max}, {"max_rayleigh_error", curve.max_rayleigh_error}, {"samples", samples}};
}

std::string mu_curve_csv(const MuCurve& curve) {
    std::ostringstream out;
    out << "s,j,mu,rayleigh\n";
    for (const auto& s : curve.samples)
        out << fmt_double(s.s) << ',' << s.j << ',' << fmt_double(s.mu) << ',' << fmt_double(s.rayleigh) << '\n';
    return out.str();
}

json spectrum_json(const SpectrumReport& rep) {
    json mu = json::array();
    for (const auto& s : rep.mu_samples) mu.push_back({{"s", s.s}, {"j", s.j}, {"mu", s.mu}, {"rayleigh", s.rayleigh}});
    return {
        {"eigs_A", complex_list(rep.eigs_A)},
        {"eigs_A_full", complex_list(rep.eigs_A_full)},
        {"eigs_L", rep.eigs_L},
        {"morse_A", rep.morse_A},
        {"morse_L", rep.morse_L},
        {"zero_A", rep.zero_A},
        {"zero_L", rep.zero_L},
        {"zero_tol_A", rep.zero_tol_A},
        {"zero_tol_L", rep.zero_tol_L},
        {"ambiguous", complex_list(rep.ambiguous)},
        {"realness_threshold", rep.realness_threshold},
        {"stated_threshold", rep.stated_threshold},
        {"realness_violations", complex_list(rep.realness_violations)},
        {"stated_threshold_violations", complex_list(rep.stated_threshold_violations)},
        {"defective_clusters", rep.defective_clusters},
        {"xi_eta2", rep.xi_eta2},
        {"hypothesis_holds", rep.hypothesis_holds},
        {"morse_equal", rep.morse_equal},
        {"zero_equal", rep.zero_equal},
        {"realness_ok", rep.realness_ok},
        {"comparison_ok", rep.comparison_ok},
        {"mu_samples", mu},
        {"fixed_point_sigmas", rep.fixed_point_sigmas},
    };
}

json manifest_base(const json& resolved_config, const ModelParams& p, const Grid& grid, double lambda) {
    const double eta2 = grid.eta2();
    return {
        {"config", resolved_config},
        {"derived",
         {{"k", p.k},
          {"xi", p.xi},
          {"alpha", p.alpha},
          {"lambda", lambda},
          {"eta2", eta2},
          {"xi_eta2", p.xi * eta2},
          {"xi_eta2_gt_k", p.xi * eta2 > p.k},
          {"volume", grid.volume()}}},
        {"rng", {{"generator", "mt19937_64"}, {"distribution", "uniform(-1,1)"}}},
    };
}

}  // namespace mcrd::app
