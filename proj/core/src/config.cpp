#include "tvlm/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {

using Member = std::variant<std::int64_t Config::*, std::uint64_t Config::*, double Config::*, bool Config::*,
                            std::string Config::*>;

struct Field {
    const char* key;
    Member member;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        {"frames", &Config::frames},
        {"frame-height", &Config::frame_height},
        {"frame-width", &Config::frame_width},
        {"patch", &Config::patch},
        {"enc-dim", &Config::enc_dim},
        {"vit-layers", &Config::vit_layers},
        {"vit-heads", &Config::vit_heads},
        {"q-dim", &Config::q_dim},
        {"image-queries", &Config::image_queries},
        {"image-qf-layers", &Config::image_qf_layers},
        {"qf-heads", &Config::qf_heads},
        {"timestamp-off", &Config::timestamp_off},
        {"window-len", &Config::window_len},
        {"stride", &Config::stride},
        {"video-queries", &Config::video_queries},
        {"video-qf-layers", &Config::video_qf_layers},
        {"window-mode", &Config::window_mode},
        {"strict-windows", &Config::strict_windows},
        {"llm-dim", &Config::llm_dim},
        {"dec-layers", &Config::dec_layers},
        {"dec-heads", &Config::dec_heads},
        {"dec-ffn", &Config::dec_ffn},
        {"max-seq-len", &Config::max_seq_len},
        {"lora-rank", &Config::lora_rank},
        {"lora-alpha", &Config::lora_alpha},
        {"batch-size", &Config::batch_size},
        {"steps", &Config::steps},
        {"epochs", &Config::epochs},
        {"lr", &Config::lr},
        {"warmup-lr", &Config::warmup_lr},
        {"warmup-steps", &Config::warmup_steps},
        {"lr-schedule", &Config::lr_schedule},
        {"weight-decay", &Config::weight_decay},
        {"adam-beta1", &Config::adam_beta1},
        {"adam-beta2", &Config::adam_beta2},
        {"adam-eps", &Config::adam_eps},
        {"grad-clip", &Config::grad_clip},
        {"seed", &Config::seed},
        {"hit-threshold", &Config::hit_threshold},
        {"clip-length", &Config::clip_length},
    };
    return f;
}

const Field& find_field(const std::string& key) {
    for (const auto& f : fields()) {
        if (key == f.key) return f;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

Config Config::paper() {
    Config c;
    c.frames = 96;
    c.frame_height = 224;
    c.frame_width = 224;
    c.patch = 14;
    c.enc_dim = 768;
    c.q_dim = 768;
    c.image_queries = 32;
    c.image_qf_layers = 12;
    c.window_len = 32;
    c.stride = 32;
    c.video_queries = 32;
    c.video_qf_layers = 2;
    c.llm_dim = 4096;
    c.max_seq_len = 2048;
    c.lora_rank = 32;
    c.lora_alpha = 32.0;
    c.batch_size = 32;
    c.epochs = 3;
    c.lr = 3e-5;
    c.warmup_lr = 1e-6;
    c.weight_decay = 0.05;
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    const Field& f = find_field(key);
    std::visit(
        [&](auto member) {
            using T = std::decay_t<decltype(this->*member)>;
            try {
                if constexpr (std::is_same_v<T, bool>) {
                    this->*member = parse_bool(key, value);
                } else if constexpr (std::is_same_v<T, std::int64_t>) {
                    this->*member = std::stoll(value);
                } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                    this->*member = std::stoull(value);
                } else if constexpr (std::is_same_v<T, double>) {
                    this->*member = std::stod(value);
                } else {
                    this->*member = value;
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception&) {
                throw ConfigError("config key '" + key + "' cannot parse value '" + value + "'");
            }
        },
        f.member);
}

std::string Config::get(const std::string& key) const {
    const Field& f = find_field(key);
    return std::visit(
        [&](auto member) -> std::string {
            using T = std::decay_t<decltype(this->*member)>;
            if constexpr (std::is_same_v<T, bool>) {
                return (this->*member) ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                return this->*member;
            } else if constexpr (std::is_same_v<T, double>) {
                std::ostringstream os;
                os << (this->*member);
                return os.str();
            } else {
                return std::to_string(this->*member);
            }
        },
        f.member);
}

std::vector<std::string> Config::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

std::string Config::to_json() const {
    nlohmann::json j;
    for (const auto& f : fields()) {
        std::visit(
            [&](auto member) {
                using T = std::decay_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::string>) {
                    j[f.key] = this->*member;
                } else if constexpr (std::is_same_v<T, double>) {
                    j[f.key] = this->*member;
                } else {
                    j[f.key] = static_cast<std::int64_t>(this->*member);
                }
            },
            f.member);
    }
    return j.dump(2);
}

void Config::apply_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config file " + path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void Config::apply_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + std::string(e.what()));
    }
    for (const auto& [key, value] : j.items()) {
        const Field& f = find_field(key);
        std::visit(
            [&](auto member) {
                using T = std::decay_t<decltype(this->*member)>;
                try {
                    this->*member = value.get<T>();
                } catch (const nlohmann::json::exception&) {
                    throw ConfigError("config key '" + key + "' cannot take JSON value " + value.dump());
                }
            },
            f.member);
    }
}

void Config::validate() const {
    auto positive = [](const char* name, std::int64_t v) {
        if (v < 1) throw ConfigError(std::string(name) + " must be >= 1, got " + std::to_string(v));
    };
    positive("frames", frames);
    positive("patch", patch);
    positive("window-len", window_len);
    positive("stride", stride);
    positive("video-queries", video_queries);
    positive("image-queries", image_queries);
    positive("max-seq-len", max_seq_len);
    if (frame_height % patch != 0 || frame_width % patch != 0) {
        throw ConfigError("frame size " + std::to_string(frame_height) + "x" + std::to_string(frame_width) +
                          " not divisible by patch " + std::to_string(patch));
    }
    if (q_dim % qf_heads != 0) throw ConfigError("q-dim not divisible by qf-heads");
    if (enc_dim % vit_heads != 0) throw ConfigError("enc-dim not divisible by vit-heads");
    if (llm_dim % dec_heads != 0) throw ConfigError("llm-dim not divisible by dec-heads");
    if (window_mode != "sliding" && window_mode != "fixed") {
        throw ConfigError("window-mode must be 'sliding' or 'fixed', got '" + window_mode + "'");
    }
    if (strict_windows && frames % stride != 0) {
        throw ConfigError("strict windows: frames " + std::to_string(frames) + " is not a multiple of stride " +
                          std::to_string(stride));
    }
    if (lr_schedule != "cosine" && lr_schedule != "constant") {
        throw ConfigError("lr-schedule must be 'cosine' or 'constant', got '" + lr_schedule + "'");
    }
    if (lora_rank < 0) throw ConfigError("lora-rank must be >= 0 (0 disables adapters)");
    if (lora_rank > 0 && !(lora_alpha > 0.0)) throw ConfigError("lora-alpha must be positive");
    if (batch_size < 1) throw ConfigError("batch-size must be >= 1");
}

std::int64_t Config::patches_per_frame() const {
    return (frame_height / patch) * (frame_width / patch);
}

}  // namespace tvlm
