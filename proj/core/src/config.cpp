#include "love/agent/config.hpp"

#include <cstdlib>
#include <stdexcept>

namespace love {

AgentMode parse_mode(const std::string& name) {
  if (name == "love") return AgentMode::love;
  if (name == "lve") return AgentMode::lve;
  if (name == "dreamer") return AgentMode::dreamer;
  if (name == "dreamer_curious") return AgentMode::dreamer_curious;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(AgentMode mode) {
  switch (mode) {
    case AgentMode::love: return "love";
    case AgentMode::lve: return "lve";
    case AgentMode::dreamer: return "dreamer";
    case AgentMode::dreamer_curious: return "dreamer_curious";
  }
  return "love";
}

namespace {

// LOVE_<SECTION>_<KEY> (upper case) overrides section.key.
void apply_env_overrides(KvFile& kv, const char* section, const char* key) {
  std::string name = std::string("LOVE_") + section + "_" + key;
  for (auto& c : name) c = char(std::toupper(static_cast<unsigned char>(c)));
  if (const char* v = std::getenv(name.c_str())) kv.set_string(section, key, v);
}

struct Reader {
  KvFile& kv;
  void env_override(const char* section, const char* key) const {
    apply_env_overrides(kv, section, key);
  }
  std::string str(const char* s, const char* k, const std::string& d) const {
    env_override(s, k);
    return kv.get_string(s, k, d);
  }
  double num(const char* s, const char* k, double d) const {
    env_override(s, k);
    return kv.get_double(s, k, d);
  }
  long integer(const char* s, const char* k, long d) const {
    env_override(s, k);
    return kv.get_long(s, k, d);
  }
};

}  // namespace

RunConfig RunConfig::load(const std::string& path) { return from_kv(KvFile::load(path)); }

RunConfig RunConfig::from_kv(KvFile kv) {
  RunConfig c;
  Reader r{kv};

  c.mode = parse_mode(r.str("run", "mode", mode_name(c.mode)));
  c.seed = std::uint64_t(r.integer("run", "seed", long(c.seed)));
  c.episodes = int(r.integer("run", "episodes", c.episodes));
  c.env_name = r.str("run", "env", c.env_name);
  c.image_size = int(r.integer("run", "image_size", c.image_size));
  c.walls_file = r.str("run", "walls_file", c.walls_file);
  c.out_dir = r.str("run", "out_dir", c.out_dir);

  c.particles = int(r.integer("agent", "particles", c.particles));
  c.horizon = int(r.integer("agent", "horizon", c.horizon));
  c.seq_len = int(r.integer("agent", "seq_len", c.seq_len));
  c.batch_size = int(r.integer("agent", "batch_size", c.batch_size));
  c.episode_steps = int(r.integer("agent", "episode_steps", c.episode_steps));
  c.train_steps = int(r.integer("agent", "train_steps", c.train_steps));
  c.action_repeat = int(r.integer("agent", "action_repeat", c.action_repeat));
  c.seed_episodes = int(r.integer("agent", "seed_episodes", c.seed_episodes));
  c.buffer_capacity = int(r.integer("agent", "buffer_capacity", c.buffer_capacity));
  c.discount = r.num("agent", "discount", c.discount);
  c.lambda = r.num("agent", "lambda", c.lambda);
  c.beta_initial = r.num("agent", "beta_initial", c.beta_initial);
  c.beta_delta = r.num("agent", "beta_delta", c.beta_delta);
  c.beta_factor = r.num("agent", "beta_factor", c.beta_factor);
  c.beta_mode = r.str("agent", "beta_mode", c.beta_mode);
  c.interleave_prob = r.num("agent", "interleave_prob", c.interleave_prob);
  c.curiosity_weight = r.num("agent", "curiosity_weight", c.curiosity_weight);
  c.imagination_starts = int(r.integer("agent", "imagination_starts", c.imagination_starts));
  c.online_filter = r.str("agent", "online_filter", c.online_filter);
  c.checkpoint_every = int(r.integer("agent", "checkpoint_every", c.checkpoint_every));

  c.deter_dim = int(r.integer("model", "deter_dim", c.deter_dim));
  c.stoch_dim = int(r.integer("model", "stoch_dim", c.stoch_dim));
  c.units = int(r.integer("model", "units", c.units));
  c.reward_layers = int(r.integer("model", "reward_layers", c.reward_layers));
  c.value_layers = int(r.integer("model", "value_layers", c.value_layers));
  c.policy_layers = int(r.integer("model", "policy_layers", c.policy_layers));
  c.vector_enc_layers = int(r.integer("model", "vector_enc_layers", c.vector_enc_layers));
  c.vector_enc_units = int(r.integer("model", "vector_enc_units", c.vector_enc_units));
  c.channel_base = int(r.integer("model", "channel_base", c.channel_base));
  c.free_nats = r.num("model", "free_nats", c.free_nats);
  c.kl_scale = r.num("model", "kl_scale", c.kl_scale);
  c.std_floor = r.num("model", "std_floor", c.std_floor);
  c.policy_mean_scale = r.num("model", "policy_mean_scale", c.policy_mean_scale);
  c.policy_init_std = r.num("model", "policy_init_std", c.policy_init_std);
  c.policy_min_std = r.num("model", "policy_min_std", c.policy_min_std);
  c.kernel_init = r.str("model", "kernel_init", c.kernel_init);
  c.bias_init = r.str("model", "bias_init", c.bias_init);
  c.vs_scale = r.num("model", "vs_scale", c.vs_scale);

  c.model_lr = r.num("optim", "model_lr", c.model_lr);
  c.value_lr = r.num("optim", "value_lr", c.value_lr);
  c.policy_lr = r.num("optim", "policy_lr", c.policy_lr);
  c.grad_clip = r.num("optim", "grad_clip", c.grad_clip);

  for (const auto& [key, value] : kv.section("env")) {
    char* end = nullptr;
    c.env_params[key] = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size())
      throw std::runtime_error("env override " + key + " is not a number");
  }

  const auto unread = kv.unread_keys();
  if (!unread.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unread) msg += " " + k;
    throw std::runtime_error(msg);
  }

  c.apply_mode();
  c.validate();
  return c;
}

KvFile RunConfig::to_kv() const {
  KvFile kv;
  kv.set_string("run", "mode", mode_name(mode));
  kv.set_long("run", "seed", long(seed));
  kv.set_long("run", "episodes", episodes);
  kv.set_string("run", "env", env_name);
  kv.set_long("run", "image_size", image_size);
  kv.set_string("run", "walls_file", walls_file);
  kv.set_string("run", "out_dir", out_dir);

  kv.set_long("agent", "particles", particles);
  kv.set_long("agent", "horizon", horizon);
  kv.set_long("agent", "seq_len", seq_len);
  kv.set_long("agent", "batch_size", batch_size);
  kv.set_long("agent", "episode_steps", episode_steps);
  kv.set_long("agent", "train_steps", train_steps);
  kv.set_long("agent", "action_repeat", action_repeat);
  kv.set_long("agent", "seed_episodes", seed_episodes);
  kv.set_long("agent", "buffer_capacity", buffer_capacity);
  kv.set_double("agent", "discount", discount);
  kv.set_double("agent", "lambda", lambda);
  kv.set_double("agent", "beta_initial", beta_initial);
  kv.set_double("agent", "beta_delta", beta_delta);
  kv.set_double("agent", "beta_factor", beta_factor);
  kv.set_string("agent", "beta_mode", beta_mode);
  kv.set_double("agent", "interleave_prob", interleave_prob);
  kv.set_double("agent", "curiosity_weight", curiosity_weight);
  kv.set_long("agent", "imagination_starts", imagination_starts);
  kv.set_string("agent", "online_filter", online_filter);
  kv.set_long("agent", "checkpoint_every", checkpoint_every);

  kv.set_long("model", "deter_dim", deter_dim);
  kv.set_long("model", "stoch_dim", stoch_dim);
  kv.set_long("model", "units", units);
  kv.set_long("model", "reward_layers", reward_layers);
  kv.set_long("model", "value_layers", value_layers);
  kv.set_long("model", "policy_layers", policy_layers);
  kv.set_long("model", "vector_enc_layers", vector_enc_layers);
  kv.set_long("model", "vector_enc_units", vector_enc_units);
  kv.set_long("model", "channel_base", channel_base);
  kv.set_double("model", "free_nats", free_nats);
  kv.set_double("model", "kl_scale", kl_scale);
  kv.set_double("model", "std_floor", std_floor);
  kv.set_double("model", "policy_mean_scale", policy_mean_scale);
  kv.set_double("model", "policy_init_std", policy_init_std);
  kv.set_double("model", "policy_min_std", policy_min_std);
  kv.set_string("model", "kernel_init", kernel_init);
  kv.set_string("model", "bias_init", bias_init);
  kv.set_double("model", "vs_scale", vs_scale);

  kv.set_double("optim", "model_lr", model_lr);
  kv.set_double("optim", "value_lr", value_lr);
  kv.set_double("optim", "policy_lr", policy_lr);
  kv.set_double("optim", "grad_clip", grad_clip);

  for (const auto& [key, value] : env_params) kv.set_double("env", key, value);
  return kv;
}

void RunConfig::apply_mode() {
  switch (mode) {
    case AgentMode::love:
      break;
    case AgentMode::lve:
    case AgentMode::dreamer_curious:
      beta_initial = 0.0;
      beta_delta = 0.0;
      beta_factor = 1.0;
      break;
    case AgentMode::dreamer:
      particles = 1;
      beta_initial = 0.0;
      beta_delta = 0.0;
      beta_factor = 1.0;
      break;
  }
}

void RunConfig::validate() const {
  if (particles < 1) throw std::invalid_argument("config: particles >= 1");
  if (mode == AgentMode::dreamer && particles != 1)
    throw std::invalid_argument("config: dreamer mode requires one particle");
  if (mode == AgentMode::dreamer_curious && particles < 2)
    throw std::invalid_argument("config: dreamer_curious requires >= 2 particles");
  if (horizon < 1) throw std::invalid_argument("config: horizon >= 1");
  if (seq_len < 2) throw std::invalid_argument("config: seq_len >= 2");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
  if (action_repeat < 1) throw std::invalid_argument("config: action_repeat >= 1");
  if (episode_steps % action_repeat != 0)
    throw std::invalid_argument("config: episode_steps must be divisible by action_repeat");
  if (stored_steps_per_episode() + 1 < seq_len + 1)
    throw std::invalid_argument("config: episodes shorter than seq_len");
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::invalid_argument("config: discount outside [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("config: lambda outside [0, 1]");
  if (beta_mode != "linear" && beta_mode != "multiplicative")
    throw std::invalid_argument("config: beta_mode must be linear or multiplicative");
  if (interleave_prob < 0.0 || interleave_prob > 1.0)
    throw std::invalid_argument("config: interleave_prob outside [0, 1]");
  if (online_filter != "fixed0" && online_filter != "random")
    throw std::invalid_argument("config: online_filter must be fixed0 or random");
  if (kernel_init != "glorot_uniform" && kernel_init != "variance_scaling")
    throw std::invalid_argument("config: bad kernel_init");
  if (bias_init != "zeros" && bias_init != "variance_scaling")
    throw std::invalid_argument("config: bad bias_init");
}

std::uint64_t RunConfig::hash() const {
  const std::string text = to_kv().serialize();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

bool RunConfig::pixels() const {
  return env_name.size() > 7 &&
         env_name.substr(env_name.size() - 7) == "_pixels";
}

}  // namespace love
