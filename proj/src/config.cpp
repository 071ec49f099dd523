#include "gait/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gait {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_int(const std::string& s) {
    T v{};
    const std::string t = trim(s);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) throw std::invalid_argument("'" + s + "' is not a valid integer");
    return v;
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) throw std::invalid_argument("'" + s + "' is not a number");
    return v;
}

bool parse_bool(const std::string& s) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw std::invalid_argument("'" + s + "' is not true/false");
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(s)) out.push_back(parse_int<std::size_t>(item));
    return out;
}

std::array<std::size_t, 3> parse_triple(const std::string& s) {
    auto v = parse_sizes(s);
    if (v.size() != 3) throw std::invalid_argument("'" + s + "' needs three comma-separated values (t, h, w)");
    return {v[0], v[1], v[2]};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class C>
std::string join(const C& items) {
    std::string s;
    for (const auto& x : items) {
        if (!s.empty()) s += ", ";
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
            s += x;
        } else {
            s += std::to_string(x);
        }
    }
    return s;
}

std::string join_conditions(const std::vector<Condition>& cs) {
    std::vector<std::string> names;
    for (Condition c : cs) names.push_back(condition_name(c));
    return join(names);
}

std::vector<int> parse_views(const std::string& s) {
    const std::string t = trim(s);
    if (t == "casia") return casia_views();
    if (t == "oumvlp") return oumvlp_views();
    std::vector<int> out;
    for (const auto& item : split_list(t)) out.push_back(parse_int<int>(item));
    return out;
}

std::vector<std::string> parse_selectors(const std::string& s) {
    auto out = split_list(s);
    for (const auto& sel : out) {
        const auto dash = sel.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("'" + sel + "' is not a selector like nm-01");
        parse_condition(sel.substr(0, dash));
        parse_int<int>(sel.substr(dash + 1));
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

const FieldTable& fields() {
    static const FieldTable table = [] {
        FieldTable t;
        auto add = [&](std::string key, Field f) { t.emplace_back(std::move(key), std::move(f)); };
        auto size_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_int<std::size_t>(v); },
                                 [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }});
        };
        auto double_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_double(v); },
                                 [member](const RunConfig& c) { return fmt(member(const_cast<RunConfig&>(c))); }});
        };
        auto bool_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_bool(v); },
                                 [member](const RunConfig& c) {
                                     return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false");
                                 }});
        };
        auto triple_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_triple(v); },
                                 [member](const RunConfig& c) { return join(member(const_cast<RunConfig&>(c))); }});
        };
        auto sizes_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_sizes(v); },
                                 [member](const RunConfig& c) { return join(member(const_cast<RunConfig&>(c))); }});
        };
        auto selectors_field = [&](std::string key, auto member) {
            add(std::move(key), {[member](RunConfig& c, const std::string& v) { member(c) = parse_selectors(v); },
                                 [member](const RunConfig& c) { return join(member(const_cast<RunConfig&>(c))); }});
        };

        add("data.root", {[](RunConfig& c, const std::string& v) { c.data_root = trim(v); },
                          [](const RunConfig& c) { return c.data_root.string(); }});
        size_field("data.identities", [](RunConfig& c) -> std::size_t& { return c.data.identities; });
        add("data.views", {[](RunConfig& c, const std::string& v) { c.data.views = parse_views(v); },
                           [](const RunConfig& c) { return join(c.data.views); }});
        add("data.conditions", {[](RunConfig& c, const std::string& v) {
                                    c.data.conditions.clear();
                                    for (const auto& s : split_list(v)) c.data.conditions.push_back(parse_condition(s));
                                },
                                [](const RunConfig& c) { return join_conditions(c.data.conditions); }});
        size_field("data.seqs_per_cell", [](RunConfig& c) -> std::size_t& { return c.data.seqs_per_cell; });
        size_field("data.frames", [](RunConfig& c) -> std::size_t& { return c.data.frames; });
        add("data.height", {[](RunConfig& c, const std::string& v) {
                                c.data.render.height = parse_int<std::size_t>(v);
                                c.train.model.backbone.in_height = c.data.render.height;
                            },
                            [](const RunConfig& c) { return std::to_string(c.data.render.height); }});
        add("data.width", {[](RunConfig& c, const std::string& v) {
                               c.data.render.width = parse_int<std::size_t>(v);
                               c.train.model.backbone.in_width = c.data.render.width;
                           },
                           [](const RunConfig& c) { return std::to_string(c.data.render.width); }});
        double_field("data.keypoint_jitter", [](RunConfig& c) -> double& { return c.data.render.keypoint_jitter; });

        size_field("model.stem_channels", [](RunConfig& c) -> std::size_t& { return c.train.model.backbone.stem_channels; });
        triple_field("model.stem_kernel", [](RunConfig& c) -> auto& { return c.train.model.backbone.stem_kernel; });
        triple_field("model.stem_stride", [](RunConfig& c) -> auto& { return c.train.model.backbone.stem_stride; });
        triple_field("model.stem_pad", [](RunConfig& c) -> auto& { return c.train.model.backbone.stem_pad; });
        size_field("model.stem_pool", [](RunConfig& c) -> std::size_t& { return c.train.model.backbone.stem_pool; });
        sizes_field("model.channels", [](RunConfig& c) -> auto& { return c.train.model.backbone.channels; });
        sizes_field("model.pool_after", [](RunConfig& c) -> auto& { return c.train.model.backbone.pool_after; });
        size_field("model.partitions", [](RunConfig& c) -> std::size_t& { return c.train.model.backbone.partitions; });
        double_field("model.p_s", [](RunConfig& c) -> double& { return c.train.model.backbone.p_s; });
        bool_field("model.learn_p_s", [](RunConfig& c) -> bool& { return c.train.model.backbone.learn_p_s; });
        double_field("model.leaky_slope", [](RunConfig& c) -> double& { return c.train.model.backbone.leaky_slope; });
        size_field("model.clip_length", [](RunConfig& c) -> std::size_t& { return c.train.model.clip_length; });
        size_field("model.ta_hidden", [](RunConfig& c) -> std::size_t& { return c.train.model.ta_hidden; });
        size_field("model.pose_dim", [](RunConfig& c) -> std::size_t& { return c.train.model.pose_dim; });
        size_field("model.heads", [](RunConfig& c) -> std::size_t& { return c.train.model.heads; });
        size_field("model.embed_dim", [](RunConfig& c) -> std::size_t& { return c.train.model.embed_dim; });
        double_field("model.p_c", [](RunConfig& c) -> double& { return c.train.model.p_c; });
        bool_field("model.learn_p_c", [](RunConfig& c) -> bool& { return c.train.model.learn_p_c; });
        bool_field("model.pose_branch", [](RunConfig& c) -> bool& { return c.train.model.pose_branch; });

        size_field("train.P", [](RunConfig& c) -> std::size_t& { return c.train.batch.identities; });
        size_field("train.K", [](RunConfig& c) -> std::size_t& { return c.train.batch.per_identity; });
        size_field("train.crop", [](RunConfig& c) -> std::size_t& { return c.train.batch.crop; });
        double_field("train.margin", [](RunConfig& c) -> double& { return c.train.triplet.margin; });
        double_field("train.lr", [](RunConfig& c) -> double& { return c.train.adam.lr; });
        double_field("train.beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; });
        double_field("train.beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; });
        double_field("train.adam_eps", [](RunConfig& c) -> double& { return c.train.adam.eps; });
        size_field("train.steps", [](RunConfig& c) -> std::size_t& { return c.steps; });
        size_field("train.checkpoint_every", [](RunConfig& c) -> std::size_t& { return c.checkpoint_every; });
        selectors_field("train.sequences", [](RunConfig& c) -> auto& { return c.train_sequences; });

        selectors_field("eval.gallery", [](RunConfig& c) -> auto& { return c.gallery; });
        selectors_field("eval.probe", [](RunConfig& c) -> auto& { return c.probe; });

        add("run.seed", {[](RunConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>(v); },
                         [](const RunConfig& c) { return std::to_string(c.seed); }});
        add("run.workers", {[](RunConfig& c, const std::string& v) { c.workers = parse_int<int>(v); },
                            [](const RunConfig& c) { return std::to_string(c.workers); }});
        add("run.out", {[](RunConfig& c, const std::string& v) { c.out = trim(v); },
                        [](const RunConfig& c) { return c.out.string(); }});
        return t;
    }();
    return table;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == dotted_key; });
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + dotted_key + "'");
    try {
        it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(dotted_key + ": " + e.what());
    }
}

RunConfig parse_config(std::istream& is, const std::string& source) {
    static const std::set<std::string> sections{"data", "model", "train", "eval", "run"};
    RunConfig cfg;
    std::set<std::string> seen;
    std::string section, line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) throw std::invalid_argument(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
        if (section.empty()) throw std::invalid_argument(where + "key outside any section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (!seen.insert(key).second) throw std::invalid_argument(where + "duplicate key '" + key + "'");
        try {
            apply_setting(cfg, key, line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot read config " + path.string());
    return parse_config(is, path.string());
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    std::string section;
    for (const auto& [key, field] : fields()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        os << key.substr(dot + 1) << " = " << field.get(cfg) << '\n';
    }
    return os.str();
}

void RunConfig::validate() const {
    data.validate();
    if (data_root.empty()) throw std::invalid_argument("data.root is empty");
    const auto& model = train.model;
    if (model.backbone.in_height != data.render.height || model.backbone.in_width != data.render.width) {
        throw std::invalid_argument("model input size does not match data.height x data.width");
    }
    model.validate();
    train.batch.validate(model.clip_length);
    if (train.batch.identities > data.identities) {
        throw std::invalid_argument("train.P = " + std::to_string(train.batch.identities) + " exceeds data.identities = " +
                                    std::to_string(data.identities));
    }
    if (data.frames < model.clip_length) {
        throw std::invalid_argument("data.frames = " + std::to_string(data.frames) +
                                    " is shorter than model.clip_length = " + std::to_string(model.clip_length));
    }
    if (!(train.triplet.margin >= 0.0)) throw std::invalid_argument("train.margin must be >= 0");
    if (!(train.adam.lr > 0.0)) throw std::invalid_argument("train.lr must be positive");
    if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0) || !(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0)) {
        throw std::invalid_argument("train.beta1 and train.beta2 must lie in [0, 1)");
    }
    if (!(train.adam.eps > 0.0)) throw std::invalid_argument("train.adam_eps must be positive");
    if (steps == 0) throw std::invalid_argument("train.steps must be positive");
    if (checkpoint_every == 0) throw std::invalid_argument("train.checkpoint_every must be positive");
    if (train_sequences.empty()) throw std::invalid_argument("train.sequences is empty");
    if (gallery.empty() || probe.empty()) throw std::invalid_argument("eval.gallery and eval.probe must be non-empty");
    for (const auto& g : gallery)
        if (std::find(probe.begin(), probe.end(), g) != probe.end()) {
            throw std::invalid_argument("eval selector " + g + " is in both gallery and probe");
        }
    if (workers < 1) throw std::invalid_argument("run.workers must be >= 1");
    if (out.empty()) throw std::invalid_argument("run.out is empty");
}

}  // namespace gait
