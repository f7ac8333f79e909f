#include "fbmtv/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fbmtv/errors.hpp"
#include "fbmtv/path.hpp"

namespace fbmtv {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (const char ch : key) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') {
            return false;
        }
    }
    return true;
}

class ValueParser {
public:
    ValueParser(std::string text, int line_no) : text_(std::move(text)), line_no_(line_no) {}

    ConfigValue parse() {
        skip_ws();
        ConfigValue value = parse_value();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters after value");
        return value;
    }

private:
    std::string text_;
    std::size_t pos_ = 0;
    int line_no_;

    [[noreturn]] void fail(const std::string& what) const {
        throw validation_error("config line " + std::to_string(line_no_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    ConfigValue parse_value() {
        if (pos_ >= text_.size()) fail("missing value");
        const char ch = text_[pos_];
        if (ch == '"') return parse_string();
        if (ch == '[') return parse_array();
        return parse_scalar();
    }

    ConfigValue parse_string() {
        ++pos_; // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char ch = text_[pos_++];
            if (ch == '\\') {
                if (pos_ >= text_.size()) fail("unterminated escape in string");
                const char esc = text_[pos_++];
                switch (esc) {
                case '"': ch = '"'; break;
                case '\\': ch = '\\'; break;
                case 'n': ch = '\n'; break;
                case 't': ch = '\t'; break;
                default: fail("unsupported escape in string");
                }
            }
            out.push_back(ch);
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_; // closing quote
        return ConfigValue(std::move(out));
    }

    ConfigValue parse_array() {
        ++pos_; // opening bracket
        ConfigValue::Array items;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return ConfigValue(std::move(items));
        }
        while (true) {
            skip_ws();
            items.push_back(parse_value());
            skip_ws();
            if (pos_ >= text_.size()) fail("unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ']') { // trailing comma
                    ++pos_;
                    return ConfigValue(std::move(items));
                }
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return ConfigValue(std::move(items));
            }
            fail("expected ',' or ']' in array");
        }
    }

    ConfigValue parse_scalar() {
        std::size_t end = pos_;
        while (end < text_.size() && text_[end] != ',' && text_[end] != ']' &&
               !std::isspace(static_cast<unsigned char>(text_[end]))) {
            ++end;
        }
        const std::string token = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (token == "true") return ConfigValue(true);
        if (token == "false") return ConfigValue(false);
        const bool looks_float = token.find_first_of(".eE") != std::string::npos &&
                                 token.find("0x") == std::string::npos;
        try {
            if (!looks_float) {
                std::size_t used = 0;
                const std::int64_t v = std::stoll(token, &used);
                if (used == token.size()) return ConfigValue(v);
            }
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) fail("malformed number '" + token + "'");
            if (!std::isfinite(v)) fail("non-finite number '" + token + "'");
            return ConfigValue(v);
        } catch (const std::invalid_argument&) {
            fail("malformed value '" + token + "'");
        } catch (const std::out_of_range&) {
            fail("number out of range '" + token + "'");
        }
    }
};

std::string render_value(const ConfigValue& value) {
    if (value.is_bool()) return value.as_bool() ? "true" : "false";
    if (value.is_integer()) return std::to_string(value.as_integer());
    if (value.is_number()) return format_double(value.as_number());
    if (value.is_string()) {
        std::string out = "\"";
        for (const char ch : value.as_string()) {
            if (ch == '\n') {
                out += "\\n";
            } else if (ch == '\t') {
                out += "\\t";
            } else {
                if (ch == '"' || ch == '\\') out.push_back('\\');
                out.push_back(ch);
            }
        }
        out.push_back('"');
        return out;
    }
    std::string out = "[";
    const auto& items = value.as_array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += render_value(items[i]);
    }
    out.push_back(']');
    return out;
}

} // namespace

bool ConfigValue::as_bool() const {
    if (!is_bool()) throw validation_error("config value is not a boolean");
    return std::get<bool>(data_);
}

std::int64_t ConfigValue::as_integer() const {
    if (!is_integer()) throw validation_error("config value is not an integer");
    return std::get<std::int64_t>(data_);
}

double ConfigValue::as_number() const {
    if (is_integer()) return static_cast<double>(std::get<std::int64_t>(data_));
    if (std::holds_alternative<double>(data_)) return std::get<double>(data_);
    throw validation_error("config value is not a number");
}

const std::string& ConfigValue::as_string() const {
    if (!is_string()) throw validation_error("config value is not a string");
    return std::get<std::string>(data_);
}

const ConfigValue::Array& ConfigValue::as_array() const {
    if (!is_array()) throw validation_error("config value is not an array");
    return std::get<Array>(data_);
}

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        // Strip the comment tail, but not a '#' inside a quoted string.
        std::string line;
        bool in_string = false;
        bool escaped = false;
        for (const char ch : raw) {
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (ch == '\\') {
                    escaped = true;
                } else if (ch == '"') {
                    in_string = false;
                }
            } else {
                if (ch == '#') break;
                if (ch == '"') in_string = true;
            }
            line.push_back(ch);
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) {
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": invalid key '" + key + "'");
        }
        if (doc.values_.count(key) != 0) {
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": duplicate key '" + key + "'");
        }
        ValueParser parser(line.substr(eq + 1), line_no);
        doc.values_.emplace(key, parser.parse());
    }
    return doc;
}

ConfigDocument ConfigDocument::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

const ConfigValue& ConfigDocument::at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw validation_error("config is missing required key '" + key + "'");
    }
    return it->second;
}

bool ConfigDocument::get_bool(const std::string& key, bool fallback) const {
    return contains(key) ? at(key).as_bool() : fallback;
}

std::int64_t ConfigDocument::get_integer(const std::string& key) const {
    return at(key).as_integer();
}

std::int64_t ConfigDocument::get_integer(const std::string& key, std::int64_t fallback) const {
    return contains(key) ? at(key).as_integer() : fallback;
}

double ConfigDocument::get_number(const std::string& key) const {
    return at(key).as_number();
}

double ConfigDocument::get_number(const std::string& key, double fallback) const {
    return contains(key) ? at(key).as_number() : fallback;
}

std::string ConfigDocument::get_string(const std::string& key) const {
    return at(key).as_string();
}

std::string ConfigDocument::get_string(const std::string& key, const std::string& fallback) const {
    return contains(key) ? at(key).as_string() : fallback;
}

std::vector<double> ConfigDocument::get_number_list(const std::string& key) const {
    const auto& items = at(key).as_array();
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.as_number());
    return out;
}

std::vector<std::int64_t> ConfigDocument::get_integer_list(const std::string& key) const {
    const auto& items = at(key).as_array();
    std::vector<std::int64_t> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.as_integer());
    return out;
}

void ConfigDocument::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        (void)value;
        bool known = false;
        for (const auto& name : allowed) {
            if (name == key) {
                known = true;
                break;
            }
        }
        if (!known) throw validation_error("unknown config key '" + key + "'");
    }
}

std::string ConfigDocument::canonical_text() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += " = ";
        out += render_value(value);
        out.push_back('\n');
    }
    return out;
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::mean_tv: return "mean-tv";
    case ExperimentKind::frak_c: return "frak-c";
    case ExperimentKind::tails: return "tails";
    case ExperimentKind::limits: return "limits";
    case ExperimentKind::k_limit: return "k-limit";
    case ExperimentKind::scaling: return "scaling";
    }
    throw validation_error("unreachable experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "mean-tv") return ExperimentKind::mean_tv;
    if (name == "frak-c") return ExperimentKind::frak_c;
    if (name == "tails") return ExperimentKind::tails;
    if (name == "limits") return ExperimentKind::limits;
    if (name == "k-limit") return ExperimentKind::k_limit;
    if (name == "scaling") return ExperimentKind::scaling;
    throw validation_error("unknown experiment '" + name +
                           "' (expected mean-tv, frak-c, tails, limits, k-limit, or scaling)");
}

std::string to_string(VariationKind kind) {
    switch (kind) {
    case VariationKind::ttv: return "ttv";
    case VariationKind::utv: return "utv";
    case VariationKind::dtv: return "dtv";
    }
    throw validation_error("unreachable variation kind");
}

VariationKind variation_kind_from_string(const std::string& name) {
    if (name == "ttv") return VariationKind::ttv;
    if (name == "utv") return VariationKind::utv;
    if (name == "dtv") return VariationKind::dtv;
    throw validation_error("unknown variation kind '" + name + "' (expected ttv, utv, or dtv)");
}

McConfig McConfig::from_document(const ConfigDocument& doc) {
    doc.require_known_keys({"experiment", "hurst", "horizon", "c_list", "replicas", "seed",
                            "workers", "resolution", "kind", "method", "rho", "n_list", "v_max",
                            "v_points"});
    McConfig cfg;
    cfg.experiment = experiment_kind_from_string(doc.get_string("experiment"));
    cfg.h = HurstIndex(doc.get_number("hurst"));
    cfg.horizon = doc.get_number("horizon", 1.0);
    if (doc.contains("c_list")) {
        cfg.c_list = doc.get_number_list("c_list");
    } else if (cfg.experiment == ExperimentKind::frak_c) {
        cfg.c_list = {1.0}; // fixed unit truncation for the subadditive bounds
    }
    const std::int64_t replicas = doc.get_integer("replicas");
    if (replicas <= 0) throw validation_error("replicas must be positive");
    cfg.replicas = static_cast<std::size_t>(replicas);
    const std::int64_t seed = doc.get_integer("seed");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const std::int64_t workers = doc.get_integer("workers", 0);
    if (workers < 0) throw validation_error("workers must be nonnegative");
    cfg.workers = static_cast<std::size_t>(workers);
    const std::int64_t resolution = doc.get_integer("resolution", 16384);
    if (resolution < 2) throw validation_error("resolution must be at least 2 steps per unit time");
    cfg.resolution = static_cast<std::size_t>(resolution);
    cfg.kind = variation_kind_from_string(doc.get_string("kind", "ttv"));
    const std::string method = doc.get_string("method", "fft");
    if (method == "fft") {
        cfg.method = FbmMethod::circulant_embedding;
    } else if (method == "chol") {
        cfg.method = FbmMethod::cholesky;
    } else {
        throw validation_error("unknown method '" + method + "' (expected fft or chol)");
    }
    cfg.rho = doc.get_number("rho", 0.0);
    if (doc.contains("n_list")) {
        for (const std::int64_t n : doc.get_integer_list("n_list")) {
            if (n <= 0) throw validation_error("n_list entries must be positive");
            cfg.n_list.push_back(static_cast<std::size_t>(n));
        }
    }
    cfg.v_max = doc.get_number("v_max", 16.0);
    const std::int64_t v_points = doc.get_integer("v_points", 49);
    if (v_points < 2) throw validation_error("v_points must be at least 2");
    cfg.v_points = static_cast<std::size_t>(v_points);
    cfg.validate();
    return cfg;
}

McConfig McConfig::from_file(const std::string& path) {
    return from_document(ConfigDocument::parse_file(path));
}

void McConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw validation_error("horizon must be positive and finite");
    }
    if (replicas == 0) throw validation_error("replicas must be positive");
    if (experiment == ExperimentKind::tails && replicas < 100) {
        throw validation_error("tail experiments need at least 100 replicas");
    }
    if (resolution < 2) throw validation_error("resolution must be at least 2");
    if (!std::isfinite(rho)) throw validation_error("rho must be finite");
    if (experiment == ExperimentKind::frak_c) {
        if (n_list.empty()) throw validation_error("frak-c experiments need a nonempty n_list");
        for (std::size_t i = 1; i < n_list.size(); ++i) {
            if (n_list[i] <= n_list[i - 1]) {
                throw validation_error("n_list must be strictly increasing");
            }
        }
    } else if (c_list.empty()) {
        throw validation_error("config needs a nonempty c_list");
    }
    const double c_cap = std::pow(horizon, h.value());
    for (std::size_t i = 0; i < c_list.size(); ++i) {
        const double c = c_list[i];
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw validation_error("truncations must be positive and finite");
        }
        if (c > c_cap * (1.0 + 1e-12)) {
            throw validation_error("truncation " + format_double(c) +
                                   " exceeds horizon^hurst = " + format_double(c_cap));
        }
        if (i > 0 && !(c < c_list[i - 1])) {
            throw validation_error("c_list must be strictly decreasing");
        }
    }
    if (experiment == ExperimentKind::scaling && c_list.size() != 1) {
        throw validation_error("scaling experiments take exactly one truncation");
    }
    if ((experiment == ExperimentKind::mean_tv || experiment == ExperimentKind::limits ||
         experiment == ExperimentKind::k_limit) &&
        c_list.size() < 2) {
        throw validation_error("slope and limit experiments need at least two truncations");
    }
    if (experiment == ExperimentKind::tails) {
        if (!(v_max > 1.0) || !std::isfinite(v_max)) {
            throw validation_error("v_max must exceed 1");
        }
    }
}

ConfigDocument McConfig::to_document() const {
    std::string text;
    text += "experiment = \"" + to_string(experiment) + "\"\n";
    text += "hurst = " + format_double(h.value()) + "\n";
    text += "horizon = " + format_double(horizon) + "\n";
    if (!c_list.empty()) {
        text += "c_list = [";
        for (std::size_t i = 0; i < c_list.size(); ++i) {
            if (i > 0) text += ", ";
            text += format_double(c_list[i]);
        }
        text += "]\n";
    }
    text += "replicas = " + std::to_string(replicas) + "\n";
    text += "seed = " + std::to_string(seed) + "\n";
    // The worker count never affects results, so it is deliberately absent
    // from the echo: reports must compare equal across schedules.
    text += "resolution = " + std::to_string(resolution) + "\n";
    text += "kind = \"" + to_string(kind) + "\"\n";
    text += std::string("method = \"") +
            (method == FbmMethod::circulant_embedding ? "fft" : "chol") + "\"\n";
    text += "rho = " + format_double(rho) + "\n";
    if (!n_list.empty()) {
        text += "n_list = [";
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            if (i > 0) text += ", ";
            text += std::to_string(n_list[i]);
        }
        text += "]\n";
    }
    if (experiment == ExperimentKind::tails) {
        text += "v_max = " + format_double(v_max) + "\n";
        text += "v_points = " + std::to_string(v_points) + "\n";
    }
    return ConfigDocument::parse(text);
}

} // namespace fbmtv
