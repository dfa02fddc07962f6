#include "dacer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dacer/checkpoint.hpp"
#include "dacer/errors.hpp"
#include "dacer/eval.hpp"
#include "dacer/gmm.hpp"
#include "dacer/nn.hpp"

namespace dacer {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void collect_params(const std::string& prefix, const Mlp& net,
                    std::vector<std::pair<std::string, const Tensor*>>& out) {
    for (size_t i = 0; i < net.layer_count(); ++i) {
        out.emplace_back(prefix + ".l" + std::to_string(i) + ".W", &net.weight(i));
        out.emplace_back(prefix + ".l" + std::to_string(i) + ".b", &net.bias(i));
    }
}

void collect_params_mut(const std::string& prefix, Mlp& net,
                        std::vector<std::pair<std::string, Tensor*>>& out) {
    for (size_t i = 0; i < net.layer_count(); ++i) {
        out.emplace_back(prefix + ".l" + std::to_string(i) + ".W", &net.weight(i));
        out.emplace_back(prefix + ".l" + std::to_string(i) + ".b", &net.bias(i));
    }
}

double initial_alpha(const TrainConfig& cfg, NoiseMode mode) {
    switch (mode) {
        case NoiseMode::Fixed: return cfg.fixed_alpha;
        case NoiseMode::LinearDecay: return cfg.linear_from;
        case NoiseMode::Adaptive:
        case NoiseMode::None: break;
    }
    return cfg.alpha_init;
}

} // namespace

Agent::Agent(const TrainConfig& cfg, int sd, int ad, Rng& init_rng)
    : policy(sd, ad, cfg.hidden, cfg.diffusion_steps, cfg.embed_dim, cfg.final_step_noise,
             init_rng),
      critics(sd, ad, cfg.hidden, init_rng),
      state_dim(sd),
      action_dim(ad) {
    alpha.mode = parse_noise_mode(cfg.noise_mode);
    alpha.alpha = initial_alpha(cfg, alpha.mode);
    alpha.lr = cfg.alpha_lr;
    alpha.lambda = cfg.lambda;
    alpha.target_entropy = cfg.target_entropy_per_dim * ad;
    alpha.decay_from = cfg.linear_from;
    alpha.decay_to = cfg.linear_to;
}

std::vector<double> Agent::act(const std::vector<double>& state, Rng& rng) const {
    return policy.act(state, rng);
}

void Agent::save(const std::string& path, const TrainConfig& cfg, int64_t step) const {
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("state_dim", std::to_string(state_dim));
    meta.emplace_back("action_dim", std::to_string(action_dim));
    meta.emplace_back("step", std::to_string(step));
    meta.emplace_back("alpha", fmt17(alpha.alpha));
    // The full configuration rides along so a checkpoint alone can rebuild the
    // agent and its environment. out_dir is run-local and deliberately absent.
    std::istringstream echo(config_echo(cfg));
    std::string line;
    while (std::getline(echo, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        if (key == "out_dir") continue;
        meta.emplace_back("cfg_" + key, line.substr(eq + 1));
    }

    std::vector<std::pair<std::string, const Tensor*>> tensors;
    collect_params("actor", policy.net(), tensors);
    collect_params("critic1", critics.online1(), tensors);
    collect_params("critic2", critics.online2(), tensors);
    collect_params("target1", critics.target1(), tensors);
    collect_params("target2", critics.target2(), tensors);
    save_checkpoint(path, meta, tensors);
}

LoadedAgent load_agent(const std::string& path) {
    Checkpoint ck = load_checkpoint(path);

    TrainConfig cfg;
    for (const auto& [key, value] : ck.meta)
        if (key.rfind("cfg_", 0) == 0) apply_config_kv(cfg, key.substr(4), value);
    cfg.validate();

    auto meta_num = [&ck](const std::string& key) -> double {
        const std::string& v = ck.meta_value(key);
        try {
            size_t pos = 0;
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw LoadError("checkpoint: meta '" + key + "' is not a number: '" + v + "'");
        }
    };

    const int sd = static_cast<int>(meta_num("state_dim"));
    const int ad = static_cast<int>(meta_num("action_dim"));
    const auto step = static_cast<int64_t>(meta_num("step"));

    Rng scratch(0); // immediately overwritten by the stored parameters
    LoadedAgent out {Agent(cfg, sd, ad, scratch), cfg, step};
    out.agent.alpha.alpha = meta_num("alpha");

    std::vector<std::pair<std::string, Tensor*>> tensors;
    collect_params_mut("actor", out.agent.policy.net(), tensors);
    collect_params_mut("critic1", out.agent.critics.online1(), tensors);
    collect_params_mut("critic2", out.agent.critics.online2(), tensors);
    collect_params_mut("target1", out.agent.critics.target1(), tensors);
    collect_params_mut("target2", out.agent.critics.target2(), tensors);
    for (auto& [name, t] : tensors) ck.load_into(name, *t);
    return out;
}

std::string make_run_dir(const TrainConfig& cfg) {
    std::string dir = cfg.out_dir;
    if (dir.empty()) {
        std::time_t now = std::time(nullptr);
        std::tm tm {};
        localtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
        std::string base = "runs/" + cfg.env + "_s" + std::to_string(cfg.seed) + "_" + stamp;
        dir = base;
        for (int k = 1; fs::exists(dir); ++k) dir = base + "_" + std::to_string(k);
    }
    fs::create_directories(dir);
    return dir;
}

TrainResult train(const TrainConfig& cfg) {
    auto train_env = make_env(cfg.env, cfg.multigoal_spec());
    auto eval_env = make_env(cfg.env, cfg.multigoal_spec());
    return train_with_env(cfg, *train_env, *eval_env);
}

TrainResult train_with_env(const TrainConfig& cfg, Env& env, Env& eval_env) {
    cfg.validate();
    if (env.state_dim() != eval_env.state_dim() || env.action_dim() != eval_env.action_dim())
        throw ContractError("train: train and eval environments disagree on dimensions");

    TrainResult result;
    result.run_dir = make_run_dir(cfg);
    {
        std::ofstream f(result.run_dir + "/config.txt");
        f << config_echo(cfg);
    }

    // Independent streams so each consumer's draws stay stable no matter what
    // the others do. Fork order is part of the reproducibility contract.
    Rng master(cfg.seed);
    Rng init_rng = master.fork(1);
    Rng env_rng = master.fork(2);     // episode starts
    Rng act_rng = master.fork(3);     // denoising chains while collecting
    Rng explore_rng = master.fork(4); // exploration noise on collected actions
    Rng sample_rng = master.fork(5);  // replay batch draws
    Rng target_rng = master.fork(6);  // next-state chains for Bellman targets
    Rng policy_rng = master.fork(7);  // chains inside policy updates
    Rng entropy_rng = master.fork(8); // entropy-estimate draws
    Rng eval_master = master.fork(9);

    const int sd = env.state_dim();
    const int ad = env.action_dim();
    Agent agent(cfg, sd, ad, init_rng);

    Adam actor_opt(agent.policy.net().params(), cfg.actor_lr);
    Adam critic_opt(agent.critics.online_params(), cfg.critic_lr);
    if (cfg.grad_clip > 0) {
        actor_opt.set_global_clip(cfg.grad_clip);
        critic_opt.set_global_clip(cfg.grad_clip);
    }

    result.buffer = std::make_shared<ReplayBuffer>(cfg.buffer_capacity);
    ReplayBuffer& buffer = *result.buffer;
    RunMetrics& metrics = result.metrics;
    GradTape tape;

    const auto update_threshold =
        static_cast<size_t>(std::max<int64_t>(cfg.warmup_size, cfg.batch_size));
    const int B = cfg.batch_size;

    std::deque<std::string> periodic_ckpts;
    auto save_ckpt = [&](const std::string& name, int64_t step) {
        std::string path = result.run_dir + "/" + name;
        agent.save(path, cfg, step);
        return path;
    };
    auto flush_metrics = [&] { metrics.write_csv(result.run_dir + "/metrics.csv"); };
    auto emergency_stop = [&](int64_t step) {
        metrics.append(step, "abort_step", static_cast<double>(step));
        save_ckpt("abort.ckpt", step);
        flush_metrics();
    };

    ActionSampler entropy_sampler = [&agent](const std::vector<double>& st, int n, Rng& r,
                                             std::vector<double>& out) {
        agent.policy.sample_actions_plain(st, n, r, out);
    };
    EmOptions em_opts;

    std::vector<double> state = env.reset(env_rng);
    double ep_return = 0.0;
    bool have_policy_loss = false;
    double last_critic_loss = 0.0;
    double last_policy_loss = 0.0;

    for (int64_t step = 1; step <= cfg.total_steps; ++step) {
        if (agent.alpha.mode == NoiseMode::LinearDecay)
            apply_linear_decay(agent.alpha,
                               static_cast<double>(step) / static_cast<double>(cfg.total_steps));

        // ---- interact and store
        std::vector<double> action = agent.policy.act(state, act_rng);
        apply_exploration_noise(action, agent.alpha, explore_rng, /*eval_mode=*/false);
        EnvStep es;
        try {
            es = env.step(action);
        } catch (const std::exception&) {
            emergency_stop(step);
            throw;
        }
        ep_return += es.reward;
        buffer.push({state, action, es.reward * cfg.reward_scale, es.state,
                     es.terminal ? 1.0 : 0.0});
        if (es.done()) {
            metrics.append(step, "train_return", ep_return);
            ep_return = 0.0;
            state = env.reset(env_rng);
        } else {
            state = es.state;
        }

        // ---- update (gated on warm-up)
        if (buffer.size() >= update_threshold) {
            try {
                auto batch = buffer.sample(static_cast<size_t>(B), sample_rng);
                Tensor s({B, sd});
                Tensor a({B, ad});
                Tensor s2({B, sd});
                std::vector<double> r(B), dn(B);
                for (int i = 0; i < B; ++i) {
                    const Transition& t = *batch[i];
                    std::copy(t.s.begin(), t.s.end(), s.data->begin() + static_cast<size_t>(i) * sd);
                    std::copy(t.a.begin(), t.a.end(), a.data->begin() + static_cast<size_t>(i) * ad);
                    std::copy(t.s2.begin(), t.s2.end(),
                              s2.data->begin() + static_cast<size_t>(i) * sd);
                    r[i] = t.r;
                    dn[i] = t.done;
                }

                Tensor y({B, 1});
                {
                    NoGrad off_tape;
                    PolicyOutput next = agent.policy.sample_action(s2, target_rng);
                    Tensor q1t = agent.critics.q1_target(s2, next.action);
                    Tensor q2t = agent.critics.q2_target(s2, next.action);
                    std::vector<double> q1v(q1t.data->begin(), q1t.data->end());
                    std::vector<double> q2v(q2t.data->begin(), q2t.data->end());
                    std::vector<double> yv = bellman_target_values(r, dn, cfg.gamma, q1v, q2v);
                    std::copy(yv.begin(), yv.end(), y.data->begin());
                }

                critic_opt.zero_grad();
                actor_opt.zero_grad();
                Tensor closs = critic_loss(agent.critics, s, a, y);
                last_critic_loss = closs.at(0);
                if (!std::isfinite(last_critic_loss))
                    throw NumericFault("train: critic loss diverged at step " +
                                       std::to_string(step));
                tape.backward(closs);
                critic_opt.step();
                ++result.critic_updates;

                if (step % cfg.policy_delay == 0) {
                    critic_opt.zero_grad();
                    actor_opt.zero_grad();
                    Tensor ploss = policy_loss(agent.policy, s,
                                               [&agent](const Tensor& ps, const Tensor& pa) {
                                                   return std::make_pair(
                                                       agent.critics.q1(ps, pa),
                                                       agent.critics.q2(ps, pa));
                                               },
                                               policy_rng);
                    last_policy_loss = ploss.at(0);
                    have_policy_loss = true;
                    if (!std::isfinite(last_policy_loss))
                        throw NumericFault("train: policy loss diverged at step " +
                                           std::to_string(step));
                    tape.backward(ploss);
                    actor_opt.step();
                    ++result.policy_updates;
                }

                if (step % cfg.alpha_delay == 0) {
                    std::vector<std::vector<double>> est_states;
                    est_states.reserve(cfg.entropy_state_batch);
                    auto picks = buffer.sample(static_cast<size_t>(cfg.entropy_state_batch),
                                               entropy_rng);
                    for (const Transition* t : picks) est_states.push_back(t->s);
                    double h = estimate_policy_entropy(entropy_sampler, est_states, ad,
                                                       cfg.entropy_samples, cfg.gmm_components,
                                                       em_opts, entropy_rng);
                    update_alpha(agent.alpha, h);
                    ++result.alpha_updates;
                    metrics.append(step, "entropy_estimate", h);
                    metrics.append(step, "alpha", agent.alpha.alpha);
                }

                agent.critics.soft_update(1.0 - cfg.rho);

                if (step % cfg.log_interval == 0) {
                    metrics.append(step, "critic_loss", last_critic_loss);
                    if (have_policy_loss) metrics.append(step, "policy_loss", last_policy_loss);
                }
            } catch (const NumericFault&) {
                emergency_stop(step);
                throw;
            }
        }

        // ---- evaluation and checkpoints
        if (step % cfg.eval_interval == 0) {
            Rng eval_rng = eval_master.fork(static_cast<uint64_t>(step));
            double ret = evaluate(agent.policy, eval_env, cfg.eval_episodes, eval_rng);
            metrics.append(step, "eval_return", ret);
            flush_metrics();
        }
        if (step % cfg.checkpoint_interval == 0) {
            periodic_ckpts.push_back(
                save_ckpt("ckpt_" + std::to_string(step) + ".ckpt", step));
            while (periodic_ckpts.size() > static_cast<size_t>(cfg.checkpoint_keep)) {
                fs::remove(periodic_ckpts.front());
                periodic_ckpts.pop_front();
            }
        }
    }

    result.checkpoint_path = save_ckpt("final.ckpt", cfg.total_steps);
    result.steps_completed = cfg.total_steps;
    result.final_alpha = agent.alpha.alpha;
    flush_metrics();
    return result;
}

} // namespace dacer
