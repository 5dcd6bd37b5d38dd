#include "mdsum/config.hpp"

#include <fstream>
#include <sstream>

namespace mdsum {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
    const std::pair<const char*, const char*> defaults[] = {
        {"corpus.root", ""},
        {"corpus.split", "test"},
        {"model.embed", "32"},
        {"model.hidden", "32"},
        {"model.vocab_size", "10000"},
        {"model.min_freq", "1"},
        {"attention.mode", "concentrated"},
        {"attention.k", "15"},
        {"attention.lambda", "0.9"},
        {"docset.mode", "learned"},
        {"decode.max_sentences", "10"},
        {"decode.max_words", "40"},
        {"decode.budget", "100"},
        {"decode.beam", "1"},
        {"train.epochs", "10"},
        {"train.batch_size", "1"},
        {"train.lr", "0.001"},
        {"train.metric", "rouge1"},
        {"train.patience", "2"},
        {"train.seed", "12345"},
        {"train.tune_projection", "false"},
        {"pipeline.intermediate_budget", "100"},
        {"pipeline.final_budget", "100"},
        {"runtime.workers", "1"},
    };
    for (const auto& [k, v] : defaults) {
        values_[k] = v;
        ordered_keys_.push_back(k);
    }
}

void RunConfig::set_checked(const std::string& key, const std::string& value,
                            const std::string& where) {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown configuration key '" + key + "' (" + where + ")");
    it->second = value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file: " + path.string());
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("malformed section header (" + where + ")");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value (" + where + ")");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (section.empty())
            throw ConfigError("key '" + key + "' outside any section (" + where + ")");
        set_checked(section + "." + key, value, where);
    }
}

void RunConfig::set(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + assignment);
    set_checked(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)),
                "command line");
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

int RunConfig::get_int(const std::string& key) const {
    try {
        return std::stoi(get(key));
    } catch (const std::exception&) {
        throw ConfigError("configuration key '" + key + "' is not an integer: " + get(key));
    }
}

double RunConfig::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::exception&) {
        throw ConfigError("configuration key '" + key + "' is not a number: " + get(key));
    }
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("configuration key '" + key + "' is not a boolean: " + v);
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    std::string section;
    for (const std::string& key : ordered_keys_) {
        const std::size_t dotpos = key.find('.');
        const std::string sec = key.substr(0, dotpos);
        if (sec != section) {
            if (!section.empty())
                out << '\n';
            out << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dotpos + 1) << '=' << values_.at(key) << '\n';
    }
    return out.str();
}

void RunConfig::write_echo(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "config.resolved.ini", std::ios::binary);
    if (!out)
        throw ConfigError("cannot write config echo into " + dir.string());
    out << echo();
}

ModelDims RunConfig::model_dims() const {
    ModelDims d;
    d.embed = static_cast<std::size_t>(get_int("model.embed"));
    d.hidden = static_cast<std::size_t>(get_int("model.hidden"));
    d.vocab = static_cast<std::size_t>(get_int("model.vocab_size"));
    return d;
}

std::size_t RunConfig::vocab_max_size() const {
    return static_cast<std::size_t>(get_int("model.vocab_size"));
}

std::size_t RunConfig::vocab_min_freq() const {
    return static_cast<std::size_t>(get_int("model.min_freq"));
}

AttentionConfig RunConfig::attention() const {
    AttentionConfig cfg;
    const std::string& mode = get("attention.mode");
    if (mode == "raw")
        cfg.mode = AttentionConfig::Mode::raw;
    else if (mode == "concentrated")
        cfg.mode = AttentionConfig::Mode::concentrated;
    else
        throw ConfigError("attention.mode must be raw or concentrated, got: " + mode);
    cfg.top_k = get_int("attention.k");
    cfg.damping = get_double("attention.lambda");
    if (cfg.top_k < 1)
        throw ConfigError("attention.k must be >= 1");
    if (cfg.damping < 0.0 || cfg.damping >= 1.0)
        throw ConfigError("attention.lambda must lie in [0,1)");
    return cfg;
}

DocsetWeightMode RunConfig::docset_mode() const {
    const std::string& mode = get("docset.mode");
    if (mode == "learned")
        return DocsetWeightMode::learned;
    if (mode == "uniform")
        return DocsetWeightMode::uniform;
    if (mode == "softmax")
        return DocsetWeightMode::softmax;
    throw ConfigError("docset.mode must be learned, uniform or softmax, got: " + mode);
}

GenerationConfig RunConfig::generation() const {
    GenerationConfig cfg;
    cfg.max_sentences = get_int("decode.max_sentences");
    cfg.max_words_per_sentence = get_int("decode.max_words");
    cfg.word_budget = get_int("decode.budget");
    cfg.beam_width = get_int("decode.beam");
    cfg.validate();
    return cfg;
}

TrainConfig RunConfig::train(TrainConfig::Mode mode) const {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.epochs = get_int("train.epochs");
    cfg.batch_size = get_int("train.batch_size");
    cfg.learning_rate = get_double("train.lr");
    const std::string& metric = get("train.metric");
    if (metric == "rouge1")
        cfg.metric = TrainConfig::DevMetric::rouge1;
    else if (metric == "loss")
        cfg.metric = TrainConfig::DevMetric::loss;
    else
        throw ConfigError("train.metric must be rouge1 or loss, got: " + metric);
    cfg.patience = get_int("train.patience");
    cfg.seed = static_cast<std::uint64_t>(get_int("train.seed"));
    cfg.tune_projection = get_bool("train.tune_projection");
    cfg.attention = attention();
    cfg.docset_mode = docset_mode();
    cfg.generation = generation();
    cfg.workers = workers();
    cfg.validate();
    return cfg;
}

int RunConfig::workers() const {
    const int w = get_int("runtime.workers");
    if (w < 1)
        throw ConfigError("runtime.workers must be >= 1");
    return w;
}

int RunConfig::intermediate_budget() const {
    return get_int("pipeline.intermediate_budget");
}

}  // namespace mdsum
