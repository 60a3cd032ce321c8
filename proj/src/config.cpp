#include "mvlab/config.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvlab {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) return false;
    return true;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config c;
    std::string section = "run";
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError(where + ": bad section name '" + section + "'");
            c.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!valid_name(key)) throw ConfigError(where + ": bad key '" + key + "'");
        auto& sec = c.data_[section];
        if (sec.count(key)) throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
        sec[key] = value;
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::dump() const {
    std::string out;
    for (const auto& [name, sec] : data_) {
        out += "[" + name + "]\n";
        for (const auto& [k, v] : sec) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto it = data_.find(section);
    return it != data_.end() && it->second.count(key) != 0;
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
    const auto it = data_.find(section);
    if (it == data_.end() || !it->second.count(key)) throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return it->second.at(key);
}

void Config::set(const std::string& section, const std::string& key, std::string value) {
    if (!valid_name(section) || !valid_name(key)) throw ConfigError("bad name in set(): [" + section + "] " + key);
    data_[section][key] = std::move(value);
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& kv : data_) out.push_back(kv.first);
    return out;
}

const Config::Section& Config::section(const std::string& s) const {
    static const Section empty;
    const auto it = data_.find(s);
    return it == data_.end() ? empty : it->second;
}

void Config::copy_section(const Config& other, const std::string& s) { data_[s] = other.section(s); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    if (s.empty()) throw ConfigError(where + ": empty number");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError(where + ": not a number: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(where + ": not an unsigned integer: '" + s + "'");
    return v;
}

std::int64_t parse_i64(const std::string& s, const std::string& where) {
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(where + ": not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(where + ": not a boolean: '" + s + "'");
}

const std::string* SectionReader::find(const char* key) {
    seen_.insert(key);
    if (!c_->has(s_, key)) return nullptr;
    return &c_->get(s_, key);
}

#define MVLAB_WHERE ("[" + s_ + "] " + key)

void SectionReader::operator()(const char* key, double& v) {
    if (auto p = find(key)) v = parse_double(*p, MVLAB_WHERE);
}
void SectionReader::operator()(const char* key, std::size_t& v) {
    if (auto p = find(key)) v = static_cast<std::size_t>(parse_u64(*p, MVLAB_WHERE));
}
void SectionReader::operator()(const char* key, int& v) {
    if (auto p = find(key)) v = static_cast<int>(parse_i64(*p, MVLAB_WHERE));
}
void SectionReader::operator()(const char* key, bool& v) {
    if (auto p = find(key)) v = parse_bool(*p, MVLAB_WHERE);
}
void SectionReader::operator()(const char* key, std::string& v) {
    if (auto p = find(key)) v = *p;
}
void SectionReader::operator()(const char* key, std::vector<double>& v) {
    if (auto p = find(key)) {
        v.clear();
        for (const auto& item : split_list(*p)) v.push_back(parse_double(item, MVLAB_WHERE));
    }
}
void SectionReader::operator()(const char* key, std::vector<std::size_t>& v) {
    if (auto p = find(key)) {
        v.clear();
        for (const auto& item : split_list(*p)) v.push_back(static_cast<std::size_t>(parse_u64(item, MVLAB_WHERE)));
    }
}
void SectionReader::operator()(const char* key, std::vector<std::string>& v) {
    if (auto p = find(key)) v = split_list(*p);
}

#undef MVLAB_WHERE

void SectionReader::reject_unknown() const {
    for (const auto& kv : c_->section(s_))
        if (!seen_.count(kv.first)) throw ConfigError("unknown key '" + kv.first + "' in [" + s_ + "]");
}

namespace {
template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += f(v[i]);
    }
    return out;
}
}  // namespace

void SectionWriter::operator()(const char* key, const std::vector<double>& v) {
    c_->set(s_, key, join(v, format_double));
}
void SectionWriter::operator()(const char* key, const std::vector<std::size_t>& v) {
    c_->set(s_, key, join(v, [](std::size_t x) { return std::to_string(x); }));
}
void SectionWriter::operator()(const char* key, const std::vector<std::string>& v) {
    c_->set(s_, key, join(v, [](const std::string& x) { return x; }));
}

}  // namespace mvlab
