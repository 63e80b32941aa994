#include "paneitz/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace paneitz {

std::string tool_version() { return PANEITZ_LAB_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

OutputHeader make_header(const Json& config) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return {hex, tool_version()};
}

Json record_to_json(const SolutionRecord& r, const DiscreteOperator& op, const std::string& profile_name) {
    const auto& c = op.coeffs();
    Json j;
    j["profile"] = profile_name;
    j["N"] = op.size();
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["q"] = c.q;
    j["I"] = r.I_value;
    j["E"] = r.E_value;
    j["residual"] = r.residual;
    j["sign_changes"] = r.sign_changes;
    j["solver"] = r.solver;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["trivial"] = r.trivial;
    j["task"] = r.task;
    j["u"] = r.u;
    j["u_tail"] = r.u_tail;
    return j;
}

SolutionRecord record_from_json(const Json& j) {
    SolutionRecord r;
    r.u = j.at("u").get<std::vector<double>>();
    r.u_tail = j.value("u_tail", std::vector<double>(r.u.size(), 0.0));
    r.residual = j.at("residual").get<double>();
    r.I_value = j.at("I").get<double>();
    r.E_value = j.at("E").get<double>();
    r.sign_changes = j.at("sign_changes").get<int>();
    r.solver = j.at("solver").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.value("converged", false);
    r.trivial = j.value("trivial", false);
    r.task = j.value("task", std::string());
    return r;
}

Json profile_to_json(const FoliationProfile& p, int samples) {
    if (samples < 2) throw std::invalid_argument("profile_to_json: samples must be >= 2");
    Json rows = Json::array();
    for (int i = 0; i < samples; ++i) {
        const double t = p.D * (i + 0.5) / samples;
        rows.push_back({{"t", t}, {"logA", p.log_area(t)}});
    }
    return {{"name", p.name}, {"n", p.n}, {"m0", p.m0}, {"m1", p.m1}, {"D", p.D}, {"samples", rows}};
}

Json with_header(const OutputHeader& h, const std::string& key, Json body) {
    Json j;
    j["header"] = {{"config_hash", h.config_hash}, {"tool_version", h.tool_version}};
    j[key] = std::move(body);
    return j;
}

void write_csv_header(std::ostream& os, const OutputHeader& h) {
    os << "# config_hash=" << h.config_hash << "\n# tool_version=" << h.tool_version << '\n';
}

void write_sweep_summary_csv(std::ostream& os, const SweepResult& sweep) {
    os << "m,d_m,I,E,residual,sign_changes,converged\n";
    const auto old = os.precision(17);
    for (const auto& level : sweep.levels) {
        const auto& r = level.refined;
        os << level.m << ',' << level.d_m << ',' << r.I_value << ',' << r.E_value << ',' << r.residual << ','
           << r.sign_changes << ',' << (r.converged ? "true" : "false") << '\n';
    }
    os.precision(old);
}

void write_profile_csv(std::ostream& os, const Grid& g, const SolutionRecord& r) {
    if (static_cast<int>(r.u.size()) != g.N) throw std::invalid_argument("write_profile_csv: dimension mismatch");
    os << "t,u\n";
    const auto old = os.precision(17);
    for (int j = 0; j < g.N; ++j) os << g.t[j] << ',' << r.u[j] << '\n';
    os.precision(old);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace paneitz
