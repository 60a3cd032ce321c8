#pragma once
// Flat key = value configuration with [section] headers.  Parsing is strict:
// duplicate keys, malformed lines and (through SectionReader) unknown keys
// are errors.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace mvlab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    using Section = std::map<std::string, std::string>;

    static Config parse(std::string_view text);
    static Config load(const std::string& path);

    /// Canonical text: sections and keys in sorted order.
    std::string dump() const;

    bool has_section(const std::string& s) const { return data_.count(s) != 0; }
    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, std::string value);
    void ensure_section(const std::string& s) { data_[s]; }
    std::vector<std::string> sections() const;
    const Section& section(const std::string& s) const;
    /// Copies one section from another config (replacing it).
    void copy_section(const Config& other, const std::string& s);

    bool operator==(const Config& o) const { return data_ == o.data_; }

private:
    std::map<std::string, Section> data_;
};

std::string format_double(double v);
double parse_double(const std::string& s, const std::string& where);
std::uint64_t parse_u64(const std::string& s, const std::string& where);
std::int64_t parse_i64(const std::string& s, const std::string& where);
bool parse_bool(const std::string& s, const std::string& where);

/// Binds typed fields to one section, remembering which keys were used.
class SectionReader {
public:
    SectionReader(const Config& c, std::string section) : c_(&c), s_(std::move(section)) {}

    void operator()(const char* key, double& v);
    void operator()(const char* key, std::size_t& v);
    void operator()(const char* key, int& v);
    template <class U>
        requires(std::is_same_v<U, std::uint64_t> && !std::is_same_v<U, std::size_t>)
    void operator()(const char* key, U& v) {
        if (auto p = find(key)) v = parse_u64(*p, "[" + s_ + "] " + key);
    }
    void operator()(const char* key, bool& v);
    void operator()(const char* key, std::string& v);
    void operator()(const char* key, std::vector<double>& v);
    void operator()(const char* key, std::vector<std::size_t>& v);
    void operator()(const char* key, std::vector<std::string>& v);

    /// Throws ConfigError naming the first key of the section that no field
    /// claimed.
    void reject_unknown() const;

private:
    const std::string* find(const char* key);
    const Config* c_;
    std::string s_;
    std::set<std::string> seen_;
};

/// Writes typed fields back as canonical text.
class SectionWriter {
public:
    SectionWriter(Config& c, std::string section) : c_(&c), s_(std::move(section)) { c_->ensure_section(s_); }

    void operator()(const char* key, const double& v) { c_->set(s_, key, format_double(v)); }
    void operator()(const char* key, const std::size_t& v) { c_->set(s_, key, std::to_string(v)); }
    void operator()(const char* key, const int& v) { c_->set(s_, key, std::to_string(v)); }
    template <class U>
        requires(std::is_same_v<U, std::uint64_t> && !std::is_same_v<U, std::size_t>)
    void operator()(const char* key, const U& v) {
        c_->set(s_, key, std::to_string(v));
    }
    void operator()(const char* key, const bool& v) { c_->set(s_, key, v ? "true" : "false"); }
    void operator()(const char* key, const std::string& v) { c_->set(s_, key, v); }
    void operator()(const char* key, const std::vector<double>& v);
    void operator()(const char* key, const std::vector<std::size_t>& v);
    void operator()(const char* key, const std::vector<std::string>& v);

private:
    Config* c_;
    std::string s_;
};

/// Reads a params struct exposing `template <class B> void fields(B&)` from
/// a section, rejecting unknown keys.
template <class P>
P read_section(const Config& c, const std::string& section, P p = P{}) {
    SectionReader r(c, section);
    p.fields(r);
    r.reject_unknown();
    return p;
}

template <class P>
void write_section(Config& c, const std::string& section, P p) {
    SectionWriter w(c, section);
    p.fields(w);
}

}  // namespace mvlab
