#include "config.hpp"

#include <fstream>
#include <sstream>

namespace minv {

namespace {

struct SchemaRow {
    const char* section;
    const char* key;
    const char* value;
    const char* comment;
};

// clang-format off
const SchemaRow kSchema[] = {
    {"data", "source",          "glyphs", "glyphs | idx | modes"},
    {"data", "glyph_classes",   "20",     "synthetic corpus class count (max 20)"},
    {"data", "glyph_per_class", "300",    ""},
    {"data", "glyph_size",      "16",     "glyph images are size x size"},
    {"data", "idx_images",      "data/train-images-idx3-ubyte", "IDX image file"},
    {"data", "idx_labels",      "data/train-labels-idx1-ubyte", "IDX label file"},
    {"data", "idx_images2",     "",       "optional second corpus to merge"},
    {"data", "idx_labels2",     "",       ""},
    {"data", "keep",            "",       "classifier class subset, e.g. 0,1,2,3,4,5 (empty = all)"},
    {"data", "relabel",         "true",   "remap kept classes to 0..k-1"},

    {"classifier", "hidden",    "256",    "hidden width of the 2-layer MLP"},
    {"classifier", "epochs",    "10",     ""},
    {"classifier", "batch",     "64",     ""},
    {"classifier", "optimizer", "adam",   "adam | sgd"},
    {"classifier", "lr",        "0.001",  ""},
    {"classifier", "beta1",     "0.9",    ""},
    {"classifier", "beta2",     "0.999",  ""},

    {"gan", "latent",     "64",              "latent dimension"},
    {"gan", "hidden",     "256",             ""},
    {"gan", "epochs",     "50",              ""},
    {"gan", "batch",      "64",              ""},
    {"gan", "prior",      "normal",          "normal | uniform (U[-1,1])"},
    {"gan", "gen_loss",   "non-saturating",  "non-saturating | minimax"},
    {"gan", "disc_steps", "1",               "discriminator updates per generator update"},
    {"gan", "optimizer",  "adam",            ""},
    {"gan", "lr",         "0.0002",          "generator learning rate"},
    {"gan", "disc_lr",    "",                "discriminator learning rate (empty = gan.lr)"},
    {"gan", "beta1",      "0.5",             ""},
    {"gan", "beta2",      "0.999",           ""},

    {"attack", "mode",        "latent", "latent | direct"},
    {"attack", "class",       "0",      "target class index"},
    {"attack", "lambda",      "0.01",   "regularization weight"},
    {"attack", "p",           "none",   "none | 1..6"},
    {"attack", "regularize",  "z",      "latent mode: z | image"},
    {"attack", "optimizer",   "adam",   ""},
    {"attack", "lr",          "0.05",   ""},
    {"attack", "iters",       "2000",   "max iterations per restart"},
    {"attack", "tol",         "1e-6",   "stop when best loss improves < tol over patience iters"},
    {"attack", "patience",    "50",     ""},
    {"attack", "restarts",    "8",      ""},
    {"attack", "newton",      "false",  "second-order refinement after convergence"},
    {"attack", "cg_tol",      "0.0001", ""},
    {"attack", "cg_iters",    "100",    ""},
    {"attack", "cg_damping",  "0.001",  ""},
    {"attack", "nn_distance", "true",   "report distance to nearest training sample"},

    {"manifold", "pairs",             "10000", "sampled latent pairs"},
    {"manifold", "class_a",           "0",     ""},
    {"manifold", "class_b",           "1",     ""},
    {"manifold", "samples_per_class", "500",   "held-out samples per class for gamma"},
    {"manifold", "interp_steps",      "9",     ""},

    {"models", "target",        "out/target.model",    ""},
    {"models", "generator",     "out/generator.model", ""},
    {"models", "discriminator", "",                    "optional"},

    {"render", "what",  "generator", "generator | dataset"},
    {"render", "count", "36",        ""},
    {"render", "cols",  "6",         ""},

    {"reproduce", "keep", "0,1,2,3,4,5", "classes the target model is trained on"},

    {"run", "seed",     "42", ""},
    {"run", "parallel", "1",  "concurrent restarts / sweep cells"},
};
// clang-format on

} // namespace

Config::Config() {
    for (const SchemaRow& row : kSchema)
        entries_.push_back({row.section, row.key, row.value, row.comment});
}

Config::Entry* Config::find(const std::string& dotted_key) {
    const std::size_t dotpos = dotted_key.find('.');
    if (dotpos == std::string::npos) return nullptr;
    const std::string sec = dotted_key.substr(0, dotpos);
    const std::string key = dotted_key.substr(dotpos + 1);
    for (Entry& e : entries_)
        if (e.section == sec && e.key == key) return &e;
    return nullptr;
}

const Config::Entry* Config::find(const std::string& dotted_key) const {
    return const_cast<Config*>(this)->find(dotted_key);
}

void Config::load_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), Errc::io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    load_text(ss.str(), path);
}

void Config::load_text(const std::string& text, const std::string& origin) {
    for (const KvEntry& kv : parse_kv_text(text, Errc::config)) {
        Entry* e = find(kv.section + "." + kv.key);
        require(e != nullptr, Errc::config,
                origin + ": unknown configuration key [" + kv.section + "] " + kv.key);
        e->value = kv.value;
    }
}

void Config::set(const std::string& dotted_key, const std::string& value) {
    Entry* e = find(dotted_key);
    require(e != nullptr, Errc::config, "unknown configuration key '" + dotted_key + "'");
    e->value = trim(value);
}

bool Config::has(const std::string& dotted_key) const {
    const Entry* e = find(dotted_key);
    return e && !e->value.empty();
}

std::string Config::get(const std::string& dotted_key) const {
    const Entry* e = find(dotted_key);
    require(e != nullptr, Errc::config, "unknown configuration key '" + dotted_key + "'");
    return e->value;
}

double Config::get_double(const std::string& dotted_key) const {
    const std::string v = get(dotted_key);
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        require(used == v.size(), Errc::config, "");
        return d;
    } catch (...) {
        raise(Errc::config, "'" + dotted_key + "' expects a number, got '" + v + "'");
    }
}

int Config::get_int(const std::string& dotted_key) const {
    const std::string v = get(dotted_key);
    try {
        std::size_t used = 0;
        int i = std::stoi(v, &used);
        require(used == v.size(), Errc::config, "");
        return i;
    } catch (...) {
        raise(Errc::config, "'" + dotted_key + "' expects an integer, got '" + v + "'");
    }
}

std::uint64_t Config::get_u64(const std::string& dotted_key) const {
    const std::string v = get(dotted_key);
    try {
        std::size_t used = 0;
        unsigned long long i = std::stoull(v, &used);
        require(used == v.size(), Errc::config, "");
        return i;
    } catch (...) {
        raise(Errc::config, "'" + dotted_key + "' expects an unsigned integer, got '" + v + "'");
    }
}

bool Config::get_bool(const std::string& dotted_key) const {
    const std::string v = get(dotted_key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    raise(Errc::config, "'" + dotted_key + "' expects true/false, got '" + v + "'");
}

std::vector<std::int32_t> Config::get_int_list(const std::string& dotted_key) const {
    const std::string v = get(dotted_key);
    std::vector<std::int32_t> out;
    if (trim(v).empty()) return out;
    std::istringstream in(v);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            require(used == tok.size(), Errc::config, "");
        } catch (...) {
            raise(Errc::config, "'" + dotted_key + "' expects a comma-separated integer list");
        }
    }
    return out;
}

std::string Config::echo_text() const {
    std::vector<KvEntry> kv;
    for (const Entry& e : entries_) kv.push_back({e.section, e.key, e.value});
    return format_kv_text(kv);
}

void Config::write_echo(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    require(f.good(), Errc::io, "cannot write config echo '" + path + "'");
    f << echo_text();
    require(f.good(), Errc::io, "config echo write failed");
}

std::string Config::defaults_text() {
    std::ostringstream os;
    std::string section;
    for (const SchemaRow& row : kSchema) {
        if (section != row.section) {
            if (!section.empty()) os << '\n';
            section = row.section;
            os << '[' << section << "]\n";
        }
        os << row.key << " = " << row.value;
        if (row.comment[0]) os << "  # " << row.comment;
        os << '\n';
    }
    return os.str();
}

} // namespace minv
