#include "dacer/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "dacer/alpha.hpp"
#include "dacer/errors.hpp"

namespace dacer {

namespace {

int64_t parse_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    int64_t r = parse_i64(key, v);
    if (r < 0) throw ConfigError("config: key '" + key + "' must be non-negative");
    return static_cast<uint64_t>(r);
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: key '" + key + "' expects true|false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ','))
        out.push_back(static_cast<int>(parse_i64(key, item)));
    if (out.empty()) throw ConfigError("config: key '" + key + "' expects a comma list");
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

} // namespace

void apply_config_kv(TrainConfig& c, const std::string& key, const std::string& v) {
    if (key == "total_steps") c.total_steps = parse_i64(key, v);
    else if (key == "warmup_size") c.warmup_size = parse_i64(key, v);
    else if (key == "batch_size") c.batch_size = static_cast<int>(parse_i64(key, v));
    else if (key == "gamma") c.gamma = parse_f64(key, v);
    else if (key == "rho") c.rho = parse_f64(key, v);
    else if (key == "policy_delay") c.policy_delay = static_cast<int>(parse_i64(key, v));
    else if (key == "alpha_delay") c.alpha_delay = parse_i64(key, v);
    else if (key == "lambda") c.lambda = parse_f64(key, v);
    else if (key == "actor_lr") c.actor_lr = parse_f64(key, v);
    else if (key == "critic_lr") c.critic_lr = parse_f64(key, v);
    else if (key == "alpha_lr") c.alpha_lr = parse_f64(key, v);
    else if (key == "diffusion_steps") c.diffusion_steps = static_cast<int>(parse_i64(key, v));
    else if (key == "gmm_components") c.gmm_components = static_cast<int>(parse_i64(key, v));
    else if (key == "entropy_samples") c.entropy_samples = static_cast<int>(parse_i64(key, v));
    else if (key == "entropy_state_batch") c.entropy_state_batch = static_cast<int>(parse_i64(key, v));
    else if (key == "reward_scale") c.reward_scale = parse_f64(key, v);
    else if (key == "seed") c.seed = parse_u64(key, v);
    else if (key == "env") c.env = v;
    else if (key == "noise_mode") c.noise_mode = v;
    else if (key == "alpha_init") c.alpha_init = parse_f64(key, v);
    else if (key == "fixed_alpha") c.fixed_alpha = parse_f64(key, v);
    else if (key == "linear_from") c.linear_from = parse_f64(key, v);
    else if (key == "linear_to") c.linear_to = parse_f64(key, v);
    else if (key == "target_entropy_per_dim") c.target_entropy_per_dim = parse_f64(key, v);
    else if (key == "buffer_capacity") c.buffer_capacity = parse_u64(key, v);
    else if (key == "hidden") c.hidden = parse_int_list(key, v);
    else if (key == "embed_dim") c.embed_dim = static_cast<int>(parse_i64(key, v));
    else if (key == "eval_interval") c.eval_interval = parse_i64(key, v);
    else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(parse_i64(key, v));
    else if (key == "checkpoint_interval") c.checkpoint_interval = parse_i64(key, v);
    else if (key == "checkpoint_keep") c.checkpoint_keep = static_cast<int>(parse_i64(key, v));
    else if (key == "log_interval") c.log_interval = parse_i64(key, v);
    else if (key == "grad_clip") c.grad_clip = parse_f64(key, v);
    else if (key == "final_step_noise") c.final_step_noise = parse_bool(key, v);
    else if (key == "out_dir") c.out_dir = v;
    else if (key == "mg_half_width") c.mg_half_width = parse_f64(key, v);
    else if (key == "mg_horizon") c.mg_horizon = static_cast<int>(parse_i64(key, v));
    else if (key == "mg_action_cost") c.mg_action_cost = parse_f64(key, v);
    else if (key == "mg_goal_radius") c.mg_goal_radius = parse_f64(key, v);
    else if (key == "mg_start_std") c.mg_start_std = parse_f64(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
}

TrainConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        // Strip comments and surrounding whitespace.
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path +
                              "' is not key=value: '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto b2 = s.find_first_not_of(" \t");
            auto e2 = s.find_last_not_of(" \t");
            s = b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(value);
        apply_config_kv(cfg, key, value);
    }
    return cfg;
}

void TrainConfig::validate() const {
    if (total_steps < 1) throw ConfigError("config: total_steps must be positive");
    if (warmup_size < 0) throw ConfigError("config: warmup_size must be >= 0");
    if (batch_size < 1) throw ConfigError("config: batch_size must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("config: gamma must lie in [0,1)");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("config: rho must lie in [0,1]");
    if (policy_delay < 1) throw ConfigError("config: policy_delay must be >= 1");
    if (alpha_delay < 1) throw ConfigError("config: alpha_delay must be >= 1");
    if (actor_lr <= 0 || critic_lr <= 0 || alpha_lr <= 0)
        throw ConfigError("config: learning rates must be positive");
    if (diffusion_steps < 1) throw ConfigError("config: diffusion_steps must be >= 1");
    if (gmm_components < 1) throw ConfigError("config: gmm_components must be >= 1");
    if (entropy_samples < gmm_components)
        throw ConfigError("config: entropy_samples must be >= gmm_components");
    if (entropy_state_batch < 1) throw ConfigError("config: entropy_state_batch must be >= 1");
    if (reward_scale <= 0) throw ConfigError("config: reward_scale must be positive");
    if (buffer_capacity < static_cast<uint64_t>(batch_size))
        throw ConfigError("config: buffer_capacity must hold at least one batch");
    if (hidden.empty()) throw ConfigError("config: hidden must name at least one layer");
    for (int h : hidden)
        if (h < 1) throw ConfigError("config: hidden sizes must be positive");
    if (embed_dim < 2 || embed_dim % 2 != 0)
        throw ConfigError("config: embed_dim must be a positive even integer");
    if (eval_interval < 1) throw ConfigError("config: eval_interval must be >= 1");
    if (eval_episodes < 1) throw ConfigError("config: eval_episodes must be >= 1");
    if (checkpoint_interval < 1) throw ConfigError("config: checkpoint_interval must be >= 1");
    if (checkpoint_keep < 1) throw ConfigError("config: checkpoint_keep must be >= 1");
    if (log_interval < 1) throw ConfigError("config: log_interval must be >= 1");
    if (grad_clip < 0) throw ConfigError("config: grad_clip must be >= 0");
    if (lambda < 0) throw ConfigError("config: lambda must be >= 0");
    if (alpha_init < 0 || fixed_alpha < 0 || linear_from < 0 || linear_to < 0)
        throw ConfigError("config: alpha values must be >= 0");
    parse_noise_mode(noise_mode); // throws on junk
}

MultiGoalSpec TrainConfig::multigoal_spec() const {
    MultiGoalSpec spec;
    spec.half_width = mg_half_width;
    spec.horizon = mg_horizon;
    spec.action_cost = mg_action_cost;
    spec.goal_radius = mg_goal_radius;
    spec.start_std = mg_start_std;
    return spec;
}

std::string config_echo(const TrainConfig& c) {
    std::map<std::string, std::string> kv;
    kv["total_steps"] = std::to_string(c.total_steps);
    kv["warmup_size"] = std::to_string(c.warmup_size);
    kv["batch_size"] = std::to_string(c.batch_size);
    kv["gamma"] = fmt(c.gamma);
    kv["rho"] = fmt(c.rho);
    kv["policy_delay"] = std::to_string(c.policy_delay);
    kv["alpha_delay"] = std::to_string(c.alpha_delay);
    kv["lambda"] = fmt(c.lambda);
    kv["actor_lr"] = fmt(c.actor_lr);
    kv["critic_lr"] = fmt(c.critic_lr);
    kv["alpha_lr"] = fmt(c.alpha_lr);
    kv["diffusion_steps"] = std::to_string(c.diffusion_steps);
    kv["gmm_components"] = std::to_string(c.gmm_components);
    kv["entropy_samples"] = std::to_string(c.entropy_samples);
    kv["entropy_state_batch"] = std::to_string(c.entropy_state_batch);
    kv["reward_scale"] = fmt(c.reward_scale);
    kv["seed"] = std::to_string(c.seed);
    kv["env"] = c.env;
    kv["noise_mode"] = c.noise_mode;
    kv["alpha_init"] = fmt(c.alpha_init);
    kv["fixed_alpha"] = fmt(c.fixed_alpha);
    kv["linear_from"] = fmt(c.linear_from);
    kv["linear_to"] = fmt(c.linear_to);
    kv["target_entropy_per_dim"] = fmt(c.target_entropy_per_dim);
    kv["buffer_capacity"] = std::to_string(c.buffer_capacity);
    kv["hidden"] = fmt(c.hidden);
    kv["embed_dim"] = std::to_string(c.embed_dim);
    kv["eval_interval"] = std::to_string(c.eval_interval);
    kv["eval_episodes"] = std::to_string(c.eval_episodes);
    kv["checkpoint_interval"] = std::to_string(c.checkpoint_interval);
    kv["checkpoint_keep"] = std::to_string(c.checkpoint_keep);
    kv["log_interval"] = std::to_string(c.log_interval);
    kv["grad_clip"] = fmt(c.grad_clip);
    kv["final_step_noise"] = c.final_step_noise ? "true" : "false";
    kv["out_dir"] = c.out_dir;
    kv["mg_half_width"] = fmt(c.mg_half_width);
    kv["mg_horizon"] = std::to_string(c.mg_horizon);
    kv["mg_action_cost"] = fmt(c.mg_action_cost);
    kv["mg_goal_radius"] = fmt(c.mg_goal_radius);
    kv["mg_start_std"] = fmt(c.mg_start_std);

    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
    return os.str();
}

} // namespace dacer
