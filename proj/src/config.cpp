#include "gnnlab/config.hpp"

#include "gnnlab/text.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace gnnlab {

std::string_view to_string(SweepKind kind) {
    switch (kind) {
    case SweepKind::Alignment: return "alignment";
    case SweepKind::GraphSize: return "graph_size";
    case SweepKind::LabeledCount: return "labeled_count";
    case SweepKind::Depth: return "depth";
    case SweepKind::ResidualAlpha: return "residual_alpha";
    case SweepKind::FeatureNoise: return "feature_noise";
    }
    return "?";
}

SweepKind parse_sweep_kind(std::string_view text) {
    for (SweepKind k : {SweepKind::Alignment, SweepKind::GraphSize, SweepKind::LabeledCount, SweepKind::Depth,
                        SweepKind::ResidualAlpha, SweepKind::FeatureNoise})
        if (text == to_string(k)) return k;
    throw std::invalid_argument("unknown sweep kind '" + std::string(text) + "'");
}

OptimizerState TrainSection::make_optimizer() const {
    return optimizer == OptimizerKind::Adam ? make_adam(lr, adam_beta1, adam_beta2, adam_eps) : make_sgd(lr);
}

std::vector<std::size_t> RunConfig::layer_dims(std::size_t d, int num_classes) const {
    std::vector<std::size_t> dims{d};
    dims.insert(dims.end(), gnn.hidden.begin(), gnn.hidden.end());
    dims.push_back(gnn.loss == LossKind::SquaredBinary ? 1 : static_cast<std::size_t>(num_classes));
    return dims;
}

GnnConfig RunConfig::gnn_config(std::size_t d, int num_classes) const {
    GnnConfig c;
    c.layer_dims = layer_dims(d, num_classes);
    c.activation = gnn.activation;
    c.residual_alpha = gnn.residual_alpha;
    c.loss = gnn.loss;
    c.init_scale = gnn.init_scale;
    c.seed = gnn.seed;
    c.linear_last_layer = gnn.linear_last_layer;
    return c;
}

PlantedConfig RunConfig::planted_config() const {
    PlantedConfig c;
    c.n = planted.n;
    c.d = planted.d;
    c.p = planted.p;
    c.q = planted.q;
    c.gamma_target = planted.gamma_ratio * static_cast<double>(planted.n);
    c.mu = sample_mu(planted.d, planted.mu_scale, planted.seed);
    c.sigma = planted.sigma;
    c.seed = planted.seed;
    return c;
}

void RunConfig::validate() const {
    if (planted.n == 0 || planted.n % 2 != 0) throw ConfigError("planted.n must be a positive even number");
    if (planted.d == 0) throw ConfigError("planted.d must be positive");
    if (!(planted.q >= 0 && planted.q <= planted.p && planted.p <= 1)) throw ConfigError("need 0 <= q <= p <= 1");
    if (!(planted.gamma_ratio >= 0 && planted.gamma_ratio <= 1)) throw ConfigError("planted.gamma_ratio must be in [0, 1]");
    if (planted.m == 0 || planted.m >= planted.n) throw ConfigError("planted.m must satisfy 0 < m < n");
    if (!(planted.sigma >= 0)) throw ConfigError("planted.sigma must be non-negative");
    if (train.epochs < 0 || train.eval_every <= 0) throw ConfigError("train.epochs >= 0 and train.eval_every > 0 required");
    if (!(train.lr >= 0)) throw ConfigError("train.lr must be non-negative");
    if (!(bounds.delta > 0 && bounds.delta < 1)) throw ConfigError("bounds.delta must be in (0, 1)");
    if (!(bounds.omega >= 0 && bounds.beta >= 0)) throw ConfigError("bounds.omega and bounds.beta must be non-negative");
    if (bounds.scale_factor && !(*bounds.scale_factor > 0)) throw ConfigError("bounds.scale_factor must be positive");
    if (sweep.seeds == 0) throw ConfigError("sweep.seeds must be positive");
    if (gnn.residual_alpha && !(*gnn.residual_alpha >= 0 && *gnn.residual_alpha <= 1))
        throw ConfigError("gnn.residual_alpha must be in [0, 1]");
}

namespace {

struct KeySpec {
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad_value(std::string_view what, std::string_view value) {
    throw ConfigError("expected " + std::string(what) + ", got '" + std::string(value) + "'");
}

double as_double(std::string_view v) {
    auto r = try_parse_double(v);
    if (!r) bad_value("a number", v);
    return *r;
}

std::uint64_t as_u64(std::string_view v) {
    auto r = try_parse_u64(v);
    if (!r) bad_value("a non-negative integer", v);
    return *r;
}

int as_int(std::string_view v) {
    auto r = try_parse_i64(v);
    if (!r || *r < INT32_MIN || *r > INT32_MAX) bad_value("an integer", v);
    return static_cast<int>(*r);
}

bool as_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value("true or false", v);
}

template <typename F>
auto wrap_enum(F parse, std::string_view v) {
    try {
        return parse(v);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

#define GNNLAB_DOUBLE(section, field)                                                                           \
    KeySpec {                                                                                                   \
        #section "." #field, [](RunConfig& c, std::string_view v) { c.section.field = as_double(v); },          \
            [](const RunConfig& c) { return format_double(c.section.field); }                                   \
    }
#define GNNLAB_SIZE(section, field)                                                                             \
    KeySpec {                                                                                                   \
        #section "." #field, [](RunConfig& c, std::string_view v) { c.section.field = as_u64(v); },             \
            [](const RunConfig& c) { return std::to_string(c.section.field); }                                  \
    }
#define GNNLAB_INT(section, field)                                                                              \
    KeySpec {                                                                                                   \
        #section "." #field, [](RunConfig& c, std::string_view v) { c.section.field = as_int(v); },             \
            [](const RunConfig& c) { return std::to_string(c.section.field); }                                  \
    }

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        GNNLAB_SIZE(planted, n),
        GNNLAB_SIZE(planted, d),
        GNNLAB_DOUBLE(planted, p),
        GNNLAB_DOUBLE(planted, q),
        GNNLAB_DOUBLE(planted, gamma_ratio),
        GNNLAB_SIZE(planted, m),
        GNNLAB_DOUBLE(planted, mu_scale),
        GNNLAB_DOUBLE(planted, sigma),
        GNNLAB_SIZE(planted, seed),
        {"gnn.hidden",
         [](RunConfig& c, std::string_view v) {
             c.gnn.hidden.clear();
             for (auto piece : split(v, ',')) c.gnn.hidden.push_back(as_u64(piece));
         },
         [](const RunConfig& c) { return join(c.gnn.hidden); }},
        {"gnn.activation",
         [](RunConfig& c, std::string_view v) { c.gnn.activation = wrap_enum(parse_activation, v); },
         [](const RunConfig& c) { return std::string(to_string(c.gnn.activation)); }},
        {"gnn.residual_alpha",
         [](RunConfig& c, std::string_view v) {
             if (v == "none")
                 c.gnn.residual_alpha.reset();
             else
                 c.gnn.residual_alpha = as_double(v);
         },
         [](const RunConfig& c) {
             return c.gnn.residual_alpha ? format_double(*c.gnn.residual_alpha) : std::string("none");
         }},
        {"gnn.loss", [](RunConfig& c, std::string_view v) { c.gnn.loss = wrap_enum(parse_loss_kind, v); },
         [](const RunConfig& c) { return std::string(to_string(c.gnn.loss)); }},
        GNNLAB_DOUBLE(gnn, init_scale),
        {"gnn.linear_last_layer",
         [](RunConfig& c, std::string_view v) {
             if (v == "auto")
                 c.gnn.linear_last_layer.reset();
             else
                 c.gnn.linear_last_layer = as_bool(v);
         },
         [](const RunConfig& c) {
             if (!c.gnn.linear_last_layer) return std::string("auto");
             return std::string(*c.gnn.linear_last_layer ? "true" : "false");
         }},
        {"gnn.diffusion",
         [](RunConfig& c, std::string_view v) { c.gnn.diffusion = wrap_enum(parse_diffusion_kind, v); },
         [](const RunConfig& c) { return std::string(to_string(c.gnn.diffusion)); }},
        GNNLAB_SIZE(gnn, seed),
        {"train.optimizer",
         [](RunConfig& c, std::string_view v) {
             if (v == "sgd")
                 c.train.optimizer = OptimizerKind::Sgd;
             else if (v == "adam")
                 c.train.optimizer = OptimizerKind::Adam;
             else
                 bad_value("sgd or adam", v);
         },
         [](const RunConfig& c) { return std::string(c.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd"); }},
        GNNLAB_DOUBLE(train, lr),
        GNNLAB_INT(train, epochs),
        GNNLAB_INT(train, eval_every),
        GNNLAB_DOUBLE(train, adam_beta1),
        GNNLAB_DOUBLE(train, adam_beta2),
        GNNLAB_DOUBLE(train, adam_eps),
        GNNLAB_DOUBLE(bounds, delta),
        GNNLAB_DOUBLE(bounds, omega),
        GNNLAB_DOUBLE(bounds, beta),
        {"bounds.param_source",
         [](RunConfig& c, std::string_view v) {
             if (v == "fixed")
                 c.bounds.param_source = ParamSource::Fixed;
             else if (v == "measured")
                 c.bounds.param_source = ParamSource::Measured;
             else
                 bad_value("fixed or measured", v);
         },
         [](const RunConfig& c) { return to_string(c.bounds.param_source); }},
        GNNLAB_DOUBLE(bounds, c6),
        GNNLAB_DOUBLE(bounds, c7),
        GNNLAB_DOUBLE(bounds, c8),
        {"bounds.scale_factor",
         [](RunConfig& c, std::string_view v) {
             if (v == "auto")
                 c.bounds.scale_factor.reset();
             else
                 c.bounds.scale_factor = as_double(v);
         },
         [](const RunConfig& c) {
             return c.bounds.scale_factor ? format_double(*c.bounds.scale_factor) : std::string("auto");
         }},
        {"sweep.kind",
         [](RunConfig& c, std::string_view v) {
             if (v == "none")
                 c.sweep.kind.reset();
             else
                 c.sweep.kind = wrap_enum(parse_sweep_kind, v);
         },
         [](const RunConfig& c) { return c.sweep.kind ? std::string(to_string(*c.sweep.kind)) : std::string("none"); }},
        {"sweep.grid",
         [](RunConfig& c, std::string_view v) {
             c.sweep.grid.clear();
             for (auto piece : split(v, ',')) c.sweep.grid.push_back(as_double(piece));
         },
         [](const RunConfig& c) { return join(c.sweep.grid); }},
        GNNLAB_SIZE(sweep, seeds),
        {"sweep.track_trc", [](RunConfig& c, std::string_view v) { c.sweep.track_trc = as_bool(v); },
         [](const RunConfig& c) { return std::string(c.sweep.track_trc ? "true" : "false"); }},
    };
    return table;
}

#undef GNNLAB_DOUBLE
#undef GNNLAB_SIZE
#undef GNNLAB_INT

const KeySpec* find_key(std::string_view name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

std::string suggestion_for(std::string_view name) {
    std::string best;
    std::size_t best_dist = SIZE_MAX;
    for (const auto& k : key_table()) {
        const std::size_t dist = levenshtein(name, k.name);
        if (dist < best_dist) {
            best_dist = dist;
            best = k.name;
        }
    }
    return best;
}

void apply(RunConfig& config, std::string_view full_key, std::string_view value) {
    const KeySpec* key = find_key(full_key);
    if (!key)
        throw ConfigError("unknown key '" + std::string(full_key) + "' (did you mean '" + suggestion_for(full_key) +
                          "'?)");
    key->set(config, value);
}

} // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void set_config_value(RunConfig& config, std::string_view full_key, std::string_view value) {
    apply(config, full_key, trim(value));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
}

RunConfig parse_config_text(std::string_view text) {
    RunConfig config;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const std::set<std::string> sections{"planted", "gnn", "train", "bounds", "sweep"};
            if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const std::string full = section + "." + std::string(trim(line.substr(0, eq)));
        if (!seen.insert(full).second) throw ConfigError(where + "duplicate key '" + full + "'");
        try {
            apply(config, full, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return config;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string to_config_text(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& k : key_table()) {
        const auto dot = k.name.find('.');
        const std::string sec = k.name.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += k.name.substr(dot + 1) + " = " + k.get(config) + "\n";
    }
    return out;
}

} // namespace gnnlab
