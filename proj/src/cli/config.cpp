#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fasticp/cli.hpp"

namespace fasticp::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

long long to_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const std::string t = trim(text);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
        throw UsageError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_seed(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const std::string t = trim(text);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
        throw UsageError("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

double to_real(const std::string& key, const std::string& text) {
    try {
        return parse_double(trim(text), "config key '" + key + "'");
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw UsageError("config key '" + key + "': expected true or false, got '" + text + "'");
}

template <typename F>
auto rethrow_usage(F&& f) {
    try {
        return f();
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
}

}  // namespace

ConfigMap read_config(std::istream& in) {
    ConfigMap out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    return read_config(in);
}

void merge_config(ConfigMap& base, const ConfigMap& overrides) {
    for (const auto& [k, v] : overrides) base[normalize_key(k)] = v;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"p1_full",      "p2_kint",     "p3_imperfect", "p4_noise",
                                                "p5_sparse100", "p6_dense100", "nl1_kint"};
    return names;
}

SweepConfig preset(const std::string& name) {
    SweepConfig c;
    c.setup = name;
    auto set = [&c](int d, double p, int n_int, int n_int_max, InterventionKind kind) {
        c.params.d = d;
        c.params.p_edge = p;
        c.params.n_int = n_int;
        c.n_int_max = n_int_max;
        c.params.intervention = kind;
    };
    if (name == "p1_full") {
        set(6, 0.240, 6, 6, InterventionKind::perfect);
    } else if (name == "p2_kint") {
        set(6, 0.145, 1, 1, InterventionKind::perfect);
    } else if (name == "p3_imperfect") {
        set(6, 0.158, 1, 1, InterventionKind::imperfect);
    } else if (name == "p4_noise") {
        set(6, 0.153, 1, 1, InterventionKind::noise);
    } else if (name == "p5_sparse100") {
        set(100, 0.010, 1, 5, InterventionKind::perfect);
    } else if (name == "p6_dense100") {
        set(100, 0.050, 1, 5, InterventionKind::perfect);
    } else if (name == "nl1_kint") {
        set(6, 0.145, 1, 1, InterventionKind::perfect);
        c.params.mechanism = Mechanism::nonlinear1;
        c.model = ModelKind::gbt;
    } else if (name != "custom") {
        throw UsageError("unknown setup '" + name + "'");
    }
    return c;
}

SweepConfig sweep_from_config(const ConfigMap& config) {
    ConfigMap cfg;
    merge_config(cfg, config);
    SweepConfig c = preset(cfg.count("setup") ? cfg.at("setup") : "custom");
    for (const auto& [key, value] : cfg) {
        if (key == "setup") {
            continue;
        } else if (key == "d") {
            c.params.d = static_cast<int>(to_int(key, value));
        } else if (key == "p_edge") {
            c.params.p_edge = to_real(key, value);
        } else if (key == "p_edge_rule") {
            c.p_edge_rule = value;
        } else if (key == "n_int") {
            c.params.n_int = static_cast<int>(to_int(key, value));
            if (!cfg.count("n_int_max")) c.n_int_max = c.params.n_int;
        } else if (key == "n_int_max") {
            c.n_int_max = static_cast<int>(to_int(key, value));
        } else if (key == "mechanism") {
            c.params.mechanism = rethrow_usage([&] { return parse_mechanism(value); });
        } else if (key == "intervention") {
            c.params.intervention = rethrow_usage([&] { return parse_intervention(value); });
        } else if (key == "symmetric_coefficients") {
            c.params.symmetric_coefficients = to_bool(key, value);
        } else if (key == "noise_variance_shift") {
            c.params.noise_variance_shift = to_real(key, value);
        } else if (key == "sample_sizes") {
            c.sample_sizes.clear();
            for (const auto& tok : split_list(value)) c.sample_sizes.push_back(static_cast<int>(to_int(key, tok)));
        } else if (key == "graphs") {
            c.graphs = static_cast<int>(to_int(key, value));
        } else if (key == "draws" || key == "coefficient_draws") {
            c.draws = static_cast<int>(to_int(key, value));
        } else if (key == "methods") {
            c.methods.clear();
            for (const auto& tok : split_list(value)) {
                c.methods.push_back(rethrow_usage([&] { return parse_method(tok); }));
            }
        } else if (key == "alpha") {
            c.alpha = to_real(key, value);
        } else if (key == "max_depth") {
            c.max_depth = static_cast<int>(to_int(key, value));
        } else if (key == "max_set_size") {
            c.max_set_size = static_cast<int>(to_int(key, value));
        } else if (key == "ias_alpha0") {
            c.ias_alpha0 = to_real(key, value);
        } else if (key == "model") {
            c.model = rethrow_usage([&] { return parse_model_kind(value); });
        } else if (key == "bonferroni") {
            c.bonferroni_envs = to_bool(key, value);
        } else if (key == "oracle") {
            c.oracle = to_bool(key, value);
        } else if (key == "preselect_k") {
            c.preselect_k = static_cast<int>(to_int(key, value));
        } else if (key == "fast_scope_cap") {
            c.fast_scope_cap = static_cast<int>(to_int(key, value));
        } else if (key == "seed") {
            c.seed = to_seed(key, value);
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
    if (c.n_int_max < c.params.n_int) c.n_int_max = c.params.n_int;
    c.validate();
    return c;
}

void SweepConfig::validate() const {
    auto fail = [](const std::string& msg) { throw UsageError("sweep config: " + msg); };
    if (params.d < 1) fail("d must be at least 1");
    if (!(params.p_edge >= 0.0 && params.p_edge <= 1.0)) fail("p_edge must lie in [0, 1]");
    if (p_edge_rule != "fixed" && p_edge_rule != "two_over_nint") fail("p_edge_rule must be fixed or two_over_nint");
    if (params.n_int < 1 || n_int_max > params.d || n_int_max < params.n_int) {
        fail("need 1 <= n_int <= n_int_max <= d");
    }
    if (sample_sizes.empty()) fail("sample_sizes must not be empty");
    for (int n : sample_sizes) {
        if (n < 4) fail("sample sizes must be at least 4");
    }
    if (graphs < 0 || draws < 1) fail("graphs must be >= 0 and draws >= 1");
    if (methods.empty()) fail("methods must not be empty");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (ias_alpha0 && !(*ias_alpha0 > 0.0 && *ias_alpha0 < 1.0)) fail("ias_alpha0 must lie in (0, 1)");
    if (max_depth < 1) fail("max_depth must be at least 1");
    if (max_set_size < 0) fail("max_set_size must be non-negative");
    if (preselect_k < 1) fail("preselect_k must be at least 1");
    if (fast_scope_cap < 1) fail("fast_scope_cap must be at least 1");
    if (oracle && params.mechanism != Mechanism::linear) fail("oracle runs need the linear mechanism");
}

ConfigMap SweepConfig::to_map() const {
    ConfigMap m;
    auto join = [](const auto& items, auto&& fmt) {
        std::string out;
        for (const auto& v : items) out += (out.empty() ? "" : ",") + fmt(v);
        return out;
    };
    m["setup"] = setup;
    m["d"] = std::to_string(params.d);
    m["p_edge"] = format_double(params.p_edge);
    m["p_edge_rule"] = p_edge_rule;
    m["n_int"] = std::to_string(params.n_int);
    m["n_int_max"] = std::to_string(n_int_max);
    m["mechanism"] = to_string(params.mechanism);
    m["intervention"] = to_string(params.intervention);
    m["symmetric_coefficients"] = params.symmetric_coefficients ? "true" : "false";
    m["noise_variance_shift"] = format_double(params.noise_variance_shift);
    m["sample_sizes"] = join(sample_sizes, [](int n) { return std::to_string(n); });
    m["graphs"] = std::to_string(graphs);
    m["draws"] = std::to_string(draws);
    m["methods"] = join(methods, [](Method x) { return to_string(x); });
    m["alpha"] = format_double(alpha);
    m["max_depth"] = std::to_string(max_depth);
    m["max_set_size"] = std::to_string(max_set_size);
    if (ias_alpha0) m["ias_alpha0"] = format_double(*ias_alpha0);
    m["model"] = to_string(model);
    m["bonferroni"] = bonferroni_envs ? "true" : "false";
    m["oracle"] = oracle ? "true" : "false";
    m["preselect_k"] = std::to_string(preselect_k);
    m["fast_scope_cap"] = std::to_string(fast_scope_cap);
    m["seed"] = std::to_string(seed);
    return m;
}

InvarianceConfig SweepConfig::invariance() const {
    InvarianceConfig c;
    c.alpha = alpha;
    c.model = model;
    c.bonferroni_envs = bonferroni_envs;
    c.gbt.seed = seed;
    return c;
}

DiscoveryOptions SweepConfig::discovery() const {
    DiscoveryOptions o;
    o.max_depth = max_depth;
    o.max_set_size = max_set_size;
    o.ias_alpha0 = ias_alpha0;
    o.fast_scope_cap = fast_scope_cap;
    return o;
}

}  // namespace fasticp::cli
