#include "dmrate/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "dmrate/errors.hpp"

namespace dmrate {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

double round12(double v) {
    if (v == 0.0) return 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ScanConfig run() {
        ScanConfig cfg;
        std::string section;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            const auto nl = text_.find('\n', pos);
            std::string_view line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
            ++line_no_;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail("unterminated section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section != "channel" && section != "detector" && section != "protocol" && section != "solver" &&
                    section != "output")
                    fail("unknown section [" + section + "]");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail("expected key = value");
            if (section.empty()) fail("key outside any section");
            assign(cfg, section, std::string(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
        }
        if (eta_d_ && (eta1_ || eta2_)) fail("eta_d cannot be combined with eta1/eta2", false);
        if (nu_el_ && (nu1_ || nu2_)) fail("nu_el cannot be combined with nu1/nu2", false);
        if (eta_d_) cfg.detector.eta1 = cfg.detector.eta2 = *eta_d_;
        if (nu_el_) cfg.detector.nu1 = cfg.detector.nu2 = *nu_el_;
        if (eta1_) cfg.detector.eta1 = *eta1_;
        if (eta2_) cfg.detector.eta2 = *eta2_;
        if (nu1_) cfg.detector.nu1 = *nu1_;
        if (nu2_) cfg.detector.nu2 = *nu2_;
        return cfg;
    }

private:
    [[noreturn]] void fail(const std::string& msg, bool with_line = true) const {
        throw ConfigError(with_line ? "config line " + std::to_string(line_no_) + ": " + msg : "config: " + msg);
    }

    double number(std::string_view s) const {
        s = trim(s);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
            fail("expected a number, got '" + std::string(s) + "'");
        return v;
    }

    int integer(std::string_view s) const {
        const double v = number(s);
        if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer, got '" + std::string(s) + "'");
        return static_cast<int>(v);
    }

    std::string word(std::string_view s) const {
        s = trim(s);
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
        return std::string(s);
    }

    // [a, b, ...] or range(start, stop, step); a bare scalar is a one-element list.
    std::vector<std::string> items(std::string_view s) const {
        std::vector<std::string> out;
        if (s.starts_with("range(")) {
            if (s.back() != ')') fail("unterminated range(...)");
            const auto args = split(s.substr(6, s.size() - 7), ',');
            if (args.size() != 3) fail("range takes start, stop, step");
            for (double v : inclusive_range(number(args[0]), number(args[1]), number(args[2]))) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.12g", v);
                out.emplace_back(buf);
            }
            return out;
        }
        if (s.starts_with("[")) {
            if (s.back() != ']') fail("unterminated list");
            const auto inner = trim(s.substr(1, s.size() - 2));
            if (inner.empty()) return out;
            for (auto item : split(inner, ',')) {
                if (item.empty()) fail("empty list element");
                out.emplace_back(item);
            }
            return out;
        }
        out.emplace_back(s);
        return out;
    }

    std::vector<double> numbers(std::string_view s) const {
        std::vector<double> out;
        for (const auto& it : items(s)) out.push_back(number(it));
        return out;
    }

    bool boolean(std::string_view s) const {
        const auto w = word(s);
        if (w == "true") return true;
        if (w == "false") return false;
        fail("expected true or false, got '" + w + "'");
    }

    void assign(ScanConfig& cfg, const std::string& section, const std::string& key, std::string_view value) {
        if (value.empty()) fail("missing value for '" + key + "'");
        if (!seen_.insert(section + "." + key).second) fail("duplicate key '" + key + "'");
        if (section == "channel") {
            if (key == "distances_km") return void(cfg.distances_km = numbers(value));
            if (key == "eta_t") return void(cfg.eta_t = numbers(value));
            if (key == "xi") return void(cfg.xi = number(value));
        } else if (section == "detector") {
            if (key == "eta_d") return void(eta_d_ = number(value));
            if (key == "nu_el") return void(nu_el_ = number(value));
            if (key == "eta1") return void(eta1_ = number(value));
            if (key == "eta2") return void(eta2_ = number(value));
            if (key == "nu1") return void(nu1_ = number(value));
            if (key == "nu2") return void(nu2_ = number(value));
        } else if (section == "protocol") {
            if (key == "alpha") return void(cfg.alphas = numbers(value));
            if (key == "delta_a") return void(cfg.deltas = numbers(value));
            if (key == "beta") return void(cfg.beta = number(value));
        } else if (section == "solver") {
            if (key == "cutoff") return void(cfg.cutoff = integer(value));
            if (key == "gap_tol") return void(cfg.gap_tol = number(value));
            if (key == "max_iters") return void(cfg.max_iters = integer(value));
            if (key == "mode") {
                cfg.modes.clear();
                for (const auto& it : items(value)) {
                    try {
                        cfg.modes.push_back(mode_from_string(word(it)));
                    } catch (const std::invalid_argument& e) {
                        fail(e.what());
                    }
                }
                return;
            }
        } else if (section == "output") {
            if (key == "path") return void(cfg.output = word(value));
            if (key == "format") return void(cfg.format = word(value));
            if (key == "best_alpha") return void(cfg.best_alpha = boolean(value));
        }
        fail("unknown key '" + key + "' in [" + section + "]");
    }

    std::string_view text_;
    int line_no_ = 0;
    std::set<std::string> seen_;
    std::optional<double> eta_d_, nu_el_, eta1_, eta2_, nu1_, nu2_;
};

}  // namespace

std::vector<double> ScanConfig::default_alpha_grid() { return inclusive_range(0.5, 0.9, 0.05); }

std::vector<double> inclusive_range(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) throw ConfigError("range needs step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 100000) throw ConfigError("range has too many points");
    std::vector<double> out;
    for (long i = 0; i < n; ++i) out.push_back(round12(start + double(i) * step));
    return out;
}

void ScanConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("config: " + msg);
    };
    require(distances_km.empty() != eta_t.empty(), "give exactly one of channel.distances_km and channel.eta_t");
    for (double L : distances_km) require(L >= 0.0, "distances must be nonnegative");
    for (double e : eta_t) require(e > 0.0 && e <= 1.0, "eta_t must lie in (0, 1]");
    require(xi >= 0.0, "xi must be nonnegative");
    try {
        detector.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    require(!alphas.empty(), "the alpha grid is empty");
    require(!deltas.empty(), "the delta_a grid is empty");
    require(!modes.empty(), "no mode selected");
    for (double a : alphas) require(a > 0.0, "alpha values must be positive");
    for (double d : deltas) require(d >= 0.0, "delta_a values must be nonnegative");
    require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    require(cutoff >= 2, "cutoff must be at least 2");
    require(gap_tol > 0.0, "gap_tol must be positive");
    require(max_iters >= 1, "max_iters must be at least 1");
    require(format == "csv" || format == "pretty", "format must be csv or pretty");
    if (!detector.simple_case())
        require(cutoff <= NumericalPathOptions{}.slow_path_cap,
                "asymmetric detectors use numerical region operators, limited to cutoff <= " +
                    std::to_string(NumericalPathOptions{}.slow_path_cap));
}

std::size_t ScanConfig::grid_size() const {
    return modes.size() * (distances_km.size() + eta_t.size()) * deltas.size() * alphas.size();
}

ScanConfig parse_config(std::string_view text) {
    ScanConfig cfg = Parser(text).run();
    cfg.validate();
    return cfg;
}

ScanConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace dmrate
