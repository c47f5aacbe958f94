#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "s2vs/errors.hpp"
#include "s2vs/trainer.hpp"

namespace s2vs {

// Flat "key = value" run configs; keys follow the training-recipe hyper-
// parameter names (T_B, N_RAug, p_overlay, ...). '#' starts a comment.
namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct ConfigField {
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

inline int64_t parse_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    }
}

inline uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        uint64_t x = std::stoull(v, &pos);
        if (pos != v.size() || v[0] == '-') throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad unsigned integer for " + key + ": '" + v + "'");
    }
}

inline double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

inline const std::map<std::string, ConfigField>& config_fields() {
    static const std::map<std::string, ConfigField> fields = [] {
        std::map<std::string, ConfigField> f;
        auto num = [&f](const std::string& key, auto accessor) {
            f[key] = {[key, accessor](TrainConfig& c, const std::string& v) {
                          accessor(c) = parse_f64(key, v);
                      },
                      [accessor](const TrainConfig& c) {
                          TrainConfig tmp = c;
                          std::ostringstream os;
                          os.precision(17);
                          os << accessor(tmp);
                          return os.str();
                      }};
        };
        auto integer = [&f](const std::string& key, auto accessor) {
            f[key] = {[key, accessor](TrainConfig& c, const std::string& v) {
                          accessor(c) = static_cast<std::decay_t<decltype(accessor(c))>>(
                              parse_i64(key, v));
                      },
                      [accessor](const TrainConfig& c) {
                          TrainConfig tmp = c;
                          return std::to_string(accessor(tmp));
                      }};
        };
        auto boolean = [&f](const std::string& key, auto accessor) {
            f[key] = {[key, accessor](TrainConfig& c, const std::string& v) {
                          accessor(c) = parse_bool(key, v);
                      },
                      [accessor](const TrainConfig& c) {
                          TrainConfig tmp = c;
                          return accessor(tmp) ? "true" : "false";
                      }};
        };

        integer("T_B", [](TrainConfig& c) -> int& { return c.aug.clip_len; });
        integer("N_RAug", [](TrainConfig& c) -> int& { return c.aug.raug_ops; });
        integer("M_RAug", [](TrainConfig& c) -> int& { return c.aug.raug_magnitude; });
        num("p_overlay", [](TrainConfig& c) -> double& { return c.aug.p_overlay; });
        num("p_blur", [](TrainConfig& c) -> double& { return c.aug.p_blur; });
        num("p_tsd", [](TrainConfig& c) -> double& { return c.aug.p_tsd; });
        num("p_ff", [](TrainConfig& c) -> double& { return c.aug.p_ff; });
        num("p_sm", [](TrainConfig& c) -> double& { return c.aug.p_sm; });
        num("p_rev", [](TrainConfig& c) -> double& { return c.aug.p_rev; });
        num("p_pau", [](TrainConfig& c) -> double& { return c.aug.p_pau; });
        num("p_shuf", [](TrainConfig& c) -> double& { return c.aug.p_shuf; });
        num("p_drop", [](TrainConfig& c) -> double& { return c.aug.p_drop; });
        num("p_cont", [](TrainConfig& c) -> double& { return c.aug.p_cont; });
        num("p_viv", [](TrainConfig& c) -> double& { return c.aug.p_viv; });
        num("lambda_viv_min", [](TrainConfig& c) -> double& { return c.aug.viv_lambda_min; });
        num("lambda_viv_max", [](TrainConfig& c) -> double& { return c.aug.viv_lambda_max; });
        num("tau", [](TrainConfig& c) -> double& { return c.loss.tau; });
        num("lambda", [](TrainConfig& c) -> double& { return c.loss.lambda; });
        num("r", [](TrainConfig& c) -> double& { return c.loss.r; });
        num("eps_log", [](TrainConfig& c) -> double& { return c.loss.eps_log; });
        boolean("sshn_self", [](TrainConfig& c) -> bool& { return c.loss.sshn_self; });
        boolean("sshn_hard", [](TrainConfig& c) -> bool& { return c.loss.sshn_hard; });
        integer("iterations", [](TrainConfig& c) -> int64_t& { return c.iterations; });
        integer("batch_videos", [](TrainConfig& c) -> int& { return c.batch_videos; });
        num("lr", [](TrainConfig& c) -> double& { return c.lr; });
        num("weight_decay", [](TrainConfig& c) -> double& { return c.weight_decay; });
        integer("warmup_iters", [](TrainConfig& c) -> int64_t& { return c.warmup_iters; });
        f["seed"] = {[](TrainConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
                     [](const TrainConfig& c) { return std::to_string(c.seed); }};
        integer("checkpoint_interval",
                [](TrainConfig& c) -> int64_t& { return c.checkpoint_interval; });
        integer("whitening_samples", [](TrainConfig& c) -> int& { return c.whitening_samples; });
        num("whitening_eps", [](TrainConfig& c) -> double& { return c.whitening_eps; });
        return f;
    }();
    return fields;
}

}  // namespace detail

// Applies "key = value" lines from `text` on top of `base`. Unknown keys and
// malformed values raise ConfigError with the offending line number.
inline TrainConfig parse_config_text(const std::string& text, TrainConfig base = {}) {
    std::istringstream is(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        auto it = detail::config_fields().find(key);
        if (it == detail::config_fields().end())
            throw ConfigError("config: unknown key '" + key + "' on line " + std::to_string(lineno));
        it->second.set(base, value);
    }
    return base;
}

inline TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {}) {
    std::ifstream is(path);
    if (!is) throw IngestError("load_config: cannot open " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), base);
}

// Full dump with every key; parse(serialize(c)) == c.
inline std::string serialize_config(const TrainConfig& c) {
    std::string out;
    for (const auto& [key, field] : detail::config_fields())
        out += key + " = " + field.get(c) + "\n";
    return out;
}

inline void save_config(const std::filesystem::path& path, const TrainConfig& c) {
    std::ofstream os(path);
    if (!os) throw IngestError("save_config: cannot open " + path.string());
    os << serialize_config(c);
    if (!os) throw IngestError("save_config: write failed for " + path.string());
}

// Key list for --help output.
inline std::string config_key_help() {
    std::string out;
    for (const auto& [key, field] : detail::config_fields()) out += key + " ";
    if (!out.empty()) out.pop_back();
    return out;
}

}  // namespace s2vs
