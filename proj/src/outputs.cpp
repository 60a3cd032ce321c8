#include "mvlab/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mvlab {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_csv(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

nlohmann::json fit_json(const SlopeFit& f) {
    return {{"slope", f.slope},   {"intercept", f.intercept}, {"slope_se", f.slope_se}, {"ci_low", f.ci_low},
            {"ci_high", f.ci_high}, {"r2", f.r2},             {"points", f.points}};
}

}  // namespace

void preflight_writable(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    const fs::path probe = fs::path(dir) / ".mvlab_write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw std::runtime_error("output directory " + dir + " is not writable");
    }
    fs::remove(probe, ec);
}

nlohmann::json manifest_json(const StudyResult& r, const std::vector<std::string>& files) {
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& s : r.config.sections()) {
        nlohmann::json sec = nlohmann::json::object();
        for (const auto& [k, v] : r.config.section(s)) sec[k] = v;
        cfg[s] = sec;
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : r.verdicts)
        verdicts.push_back({{"name", v.name},
                            {"pass", v.pass},
                            {"value", v.value},
                            {"criterion", v.criterion},
                            {"detail", v.detail}});
    nlohmann::json fits = nlohmann::json::object();
    for (const auto& f : r.fits) fits[f.series] = fit_json(f.fit);
    return {{"kind", r.kind},
            {"seed", r.seed},
            {"quick", r.quick},
            {"exploratory", r.exploratory},
            {"pass", r.pass()},
            {"wall_seconds", r.wall_seconds},
            {"config", cfg},
            {"verdicts", verdicts},
            {"fits", fits},
            {"notes", r.notes},
            {"files", files}};
}

std::vector<std::string> emit_outputs(const StudyResult& r, const std::string& dir) {
    preflight_writable(dir);
    const fs::path base(dir);
    std::vector<std::string> files;
    for (const auto& t : r.tables) {
        const auto name = r.kind + "_" + t.name + ".csv";
        write_csv(base / name, t.columns, t.rows);
        files.push_back(name);
    }
    if (!r.fits.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& f : r.fits)
            rows.push_back({f.series, cell(f.fit.slope), cell(f.fit.intercept), cell(f.fit.slope_se), cell(f.fit.ci_low),
                            cell(f.fit.ci_high), cell(f.fit.r2), cell(f.fit.points)});
        const auto name = r.kind + "_fits.csv";
        write_csv(base / name, {"series", "slope", "intercept", "slope_se", "ci_low", "ci_high", "r2", "points"}, rows);
        files.push_back(name);
    }
    for (const auto& s : r.series) {
        const auto name = r.kind + "_" + s.name + ".dat";
        std::FILE* f = std::fopen((base / name).c_str(), "w");
        if (!f) throw std::runtime_error("cannot write " + (base / name).string());
        std::fprintf(f, "# x y yerr\n");
        for (std::size_t i = 0; i < s.x.size(); ++i)
            std::fprintf(f, "%.17g %.17g %.17g\n", s.x[i], s.y[i], i < s.yerr.size() ? s.yerr[i] : 0.0);
        std::fclose(f);
        files.push_back(name);
    }
    const auto mname = r.kind + "_manifest.json";
    std::ofstream out(base / mname);
    if (!out) throw std::runtime_error("cannot write " + (base / mname).string());
    files.push_back(mname);
    out << manifest_json(r, files).dump(2) << '\n';
    std::vector<std::string> paths;
    for (const auto& f : files) paths.push_back((base / f).string());
    return paths;
}

Config config_from_manifest(const nlohmann::json& manifest) {
    if (!manifest.contains("config") || !manifest["config"].is_object())
        throw ConfigError("manifest has no config object");
    Config c;
    for (const auto& [sec, body] : manifest["config"].items()) {
        c.ensure_section(sec);
        for (const auto& [k, v] : body.items()) {
            if (!v.is_string()) throw ConfigError("manifest config value [" + sec + "] " + k + " is not a string");
            c.set(sec, k, v.get<std::string>());
        }
    }
    return c;
}

}  // namespace mvlab
