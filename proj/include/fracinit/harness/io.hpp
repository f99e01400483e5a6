#pragma once

// Text formats used by the CLI:
//   dataset CSV  `t,u,y`, one row per sample on a uniform grid
//   history CSV  `t,f`
//   key-value    `key = value` lines, `#` starts a comment
// Reals are written with 17 significant digits so a write/read cycle is exact.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracinit/signal.hpp"

namespace fracinit::harness {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw IoError("expected a number, got an empty field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw IoError("not a number: '" + s + "'");
    return v;
}

inline long long parse_integer(std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw IoError("not an integer: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<double> parse_real_list(std::string_view s) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
    return out;
}

inline std::string join_reals(const std::vector<double>& v, const char* sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += format_real(v[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// key = value
// ---------------------------------------------------------------------------

class KeyValues {
public:
    static KeyValues parse(std::istream& in) {
        KeyValues kv;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw IoError("line " + std::to_string(line_no) + ": expected 'key = value'");
            }
            kv.set(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
        }
        return kv;
    }

    static KeyValues read(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path);
        return parse(in);
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path);
        write(out);
    }

    void write(std::ostream& out) const {
        for (const auto& key : order_) out << key << " = " << values_.at(key) << '\n';
    }

    void set(const std::string& key, const std::string& value) {
        if (!values_.count(key)) order_.push_back(key);
        values_[key] = value;
    }
    void set(const std::string& key, double value) { set(key, format_real(value)); }
    void set(const std::string& key, const std::vector<double>& value) { set(key, join_reals(value)); }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::string& get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw IoError("missing key '" + key + "'");
        return it->second;
    }

    double real(const std::string& key) const { return parse_real(get(key)); }
    double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }
    long long integer(const std::string& key, long long fallback) const {
        return has(key) ? parse_integer(get(key)) : fallback;
    }
    std::vector<double> reals(const std::string& key) const { return parse_real_list(get(key)); }
    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    const std::vector<std::string>& keys() const noexcept { return order_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return columns[i];
        }
        throw IoError("CSV has no column '" + name + "'");
    }
    bool has_column(const std::string& name) const {
        for (const auto& h : header) {
            if (h == name) return true;
        }
        return false;
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    t.header = split(line, ',');
    t.columns.assign(t.header.size(), {});
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != t.header.size()) {
            throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                          " fields");
        }
        for (std::size_t i = 0; i < fields.size(); ++i) t.columns[i].push_back(parse_real(fields[i]));
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_csv(in);
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << format_real(t.columns[c][r]);
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const CsvTable& t) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_csv(out, t);
}

/// Step of a uniform time column; rounded to 12 significant digits so that
/// decimal steps such as 0.01 come back exactly.
inline double uniform_step(const std::vector<double>& t) {
    if (t.size() < 2) throw IoError("time column needs at least two samples to infer the step");
    const double raw = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(raw > 0.0)) throw IoError("time column must be increasing");
    std::ostringstream os;
    os << std::setprecision(12) << raw;
    const double h = parse_real(os.str());
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(t[k] - (t.front() + static_cast<double>(k) * h)) > 1e-6 * h) {
            throw IoError("time column is not uniform");
        }
    }
    return h;
}

inline std::vector<double> time_axis(double t0, double h, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = t0 + static_cast<double>(k) * h;
    return t;
}

/// Raw input/output record read from a dataset CSV.
struct Record {
    double t0 = 0.0;
    double h = 0.0;
    std::vector<double> u;
    std::vector<double> y;
};

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    CsvTable t;
    t.header = {"t", "u", "y"};
    t.columns = {time_axis(d.u().t_start(), d.grid().h(), d.u().size()),
                 {d.u().values().begin(), d.u().values().end()},
                 {d.y().values().begin(), d.y().values().end()}};
    write_csv(path, t);
}

/// `h` <= 0 means infer the step from the time column.
inline Record read_record_csv(const std::string& path, double h = 0.0) {
    const auto t = read_csv(path);
    if (t.header != std::vector<std::string>{"t", "u", "y"}) throw IoError(path + ": expected header t,u,y");
    Record r;
    r.t0 = t.column("t").front();
    r.h = h > 0.0 ? h : uniform_step(t.column("t"));
    r.u = t.column("u");
    r.y = t.column("y");
    return r;
}

/// Dataset with no history: t_abs = t_in = first time stamp.
inline Dataset read_dataset_csv(const std::string& path, double h = 0.0) {
    const auto r = read_record_csv(path, h);
    const SamplingGrid grid(r.h, r.t0, 0, r.u.size());
    return Dataset(grid, SampledSignal(r.t0, r.h, r.u), SampledSignal(r.t0, r.h, r.y));
}

inline void write_history_csv(const std::string& path, const HistorySegment& history, const SamplingGrid& grid) {
    CsvTable t;
    t.header = {"t", "f"};
    t.columns = {time_axis(grid.t_abs(), grid.h(), history.size()),
                 {history.values().begin(), history.values().end()}};
    write_csv(path, t);
}

inline HistorySegment read_history_csv(const std::string& path) {
    const auto t = read_csv(path);
    if (t.header != std::vector<std::string>{"t", "f"}) throw IoError(path + ": expected header t,f");
    return HistorySegment(t.column("f"));
}

}  // namespace fracinit::harness
