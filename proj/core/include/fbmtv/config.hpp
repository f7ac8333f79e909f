#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fbmtv/fbm.hpp"
#include "fbmtv/variation.hpp"

namespace fbmtv {

/**
 * Value in a flat key/value configuration document (a TOML subset:
 * `key = value` lines, `#` comments, and single-line arrays; no tables).
 */
class ConfigValue {
public:
    using Array = std::vector<ConfigValue>;

    explicit ConfigValue(bool v) : data_(v) {}
    explicit ConfigValue(std::int64_t v) : data_(v) {}
    explicit ConfigValue(double v) : data_(v) {}
    explicit ConfigValue(std::string v) : data_(std::move(v)) {}
    explicit ConfigValue(Array v) : data_(std::move(v)) {}

    bool is_bool() const noexcept { return std::holds_alternative<bool>(data_); }
    bool is_integer() const noexcept { return std::holds_alternative<std::int64_t>(data_); }
    bool is_number() const noexcept { return is_integer() || std::holds_alternative<double>(data_); }
    bool is_string() const noexcept { return std::holds_alternative<std::string>(data_); }
    bool is_array() const noexcept { return std::holds_alternative<Array>(data_); }

    bool as_bool() const;
    std::int64_t as_integer() const;
    double as_number() const;
    const std::string& as_string() const;
    const Array& as_array() const;

private:
    std::variant<bool, std::int64_t, double, std::string, Array> data_;
};

/** Flat configuration document with typed, validated accessors. */
class ConfigDocument {
public:
    /** Parse `key = value` text; duplicate keys are rejected. */
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument parse_file(const std::string& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    bool get_bool(const std::string& key, bool fallback) const;
    std::int64_t get_integer(const std::string& key) const;
    std::int64_t get_integer(const std::string& key, std::int64_t fallback) const;
    double get_number(const std::string& key) const;
    double get_number(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_number_list(const std::string& key) const;
    std::vector<std::int64_t> get_integer_list(const std::string& key) const;

    /** Throw if the document holds any key outside `allowed`. */
    void require_known_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }
    /** Canonical one-line-per-key rendering (sorted keys, full precision). */
    std::string canonical_text() const;

private:
    std::map<std::string, ConfigValue> values_;

    const ConfigValue& at(const std::string& key) const;
};

enum class ExperimentKind { mean_tv, frak_c, tails, limits, k_limit, scaling };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

std::string to_string(VariationKind kind);
VariationKind variation_kind_from_string(const std::string& name);

/**
 * Shared Monte Carlo experiment configuration.  Truncations must be
 * strictly decreasing, positive, and bounded by horizon^h; tail runs
 * need at least 100 replicas.
 */
struct McConfig {
    ExperimentKind experiment = ExperimentKind::mean_tv;
    HurstIndex h{0.5};
    double horizon = 1.0;            // S, the time-interval length
    std::vector<double> c_list;      // strictly decreasing truncations
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    std::size_t workers = 0;         // 0 = available hardware parallelism
    std::size_t resolution = 16384;  // simulation steps per unit of time
    VariationKind kind = VariationKind::ttv;
    FbmMethod method = FbmMethod::circulant_embedding;
    double rho = 0.0;                      // grid shift for k-limit runs
    std::vector<std::size_t> n_list;       // horizons for frak-c runs
    double v_max = 16.0;                   // tail deviation-grid upper end
    std::size_t v_points = 49;             // tail deviation-grid size

    static McConfig from_document(const ConfigDocument& doc);
    static McConfig from_file(const std::string& path);
    void validate() const;
    /** The config echoed back as a canonical flat document. */
    ConfigDocument to_document() const;
};

} // namespace fbmtv
