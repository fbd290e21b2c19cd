#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tda/experiment.hpp"

namespace tda {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' wants a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' wants an integer, got '" + value + "'");
  }
}

bool parse_onoff(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("config: '" + key + "' wants on/off, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& tok : split_list(value, ',')) out.push_back(parse_int(key, tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split_list(value, ',')) out.push_back(parse_double(key, tok));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> out;
  for (const auto& tok : split_list(value, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("config: '" + key + "' wants seed integers, got '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: '" + key + "' needs at least one seed");
  return out;
}

Matrix parse_means(const std::string& key, const std::string& value) {
  const auto rows = split_list(value, ';');
  if (rows.size() < 2) throw ConfigError("config: '" + key + "' wants at least two rows");
  std::vector<std::vector<double>> parsed;
  for (const auto& row : rows) parsed.push_back(parse_double_list(key, row));
  const std::size_t d = parsed[0].size();
  for (const auto& row : parsed) {
    if (row.size() != d || row.empty())
      throw ConfigError("config: '" + key + "' rows must share one width");
  }
  Matrix out(static_cast<int>(parsed.size()), static_cast<int>(d));
  for (std::size_t i = 0; i < parsed.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = parsed[i][j];
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string render_means(const Matrix& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    if (i) out += ";";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
  }
  return out;
}

constexpr double kPi = 3.14159265358979323846;

bool shift_is_identity(const ShiftSpec& s) {
  return s.rotation_rad == 0.0 && s.scale.empty() && s.translate.empty() && s.noise_std == 0.0;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path +
                        "' is not 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + " of '" + path +
                        "' has an empty key");
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "' in '" + path + "'");
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig parse_experiment_config(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  double rotation_deg = 0.0;
  for (const auto& [key, value] : kv) {
    if (key == "dataset") {
      if (value != "two-moons" && value != "gaussian-mixture" && value != "idx")
        throw ConfigError("config: unknown dataset '" + value + "'");
      cfg.dataset = value;
    } else if (key == "n_per_domain") {
      cfg.n_per_domain = parse_int(key, value);
    } else if (key == "moons_noise") {
      cfg.moons_noise = parse_double(key, value);
    } else if (key == "mixture_means") {
      cfg.mixture_means = parse_means(key, value);
    } else if (key == "mixture_n_per_class") {
      cfg.mixture_n_per_class = parse_int(key, value);
    } else if (key == "mixture_noise") {
      cfg.mixture_noise = parse_double(key, value);
    } else if (key == "shift_rotation_deg") {
      rotation_deg = parse_double(key, value);
      cfg.shift.rotation_rad = rotation_deg * kPi / 180.0;
    } else if (key == "shift_scale") {
      cfg.shift.scale = parse_double_list(key, value);
    } else if (key == "shift_translate") {
      cfg.shift.translate = parse_double_list(key, value);
    } else if (key == "shift_noise_std") {
      cfg.shift.noise_std = parse_double(key, value);
    } else if (key == "idx_source_images") {
      cfg.idx_source_images = value;
    } else if (key == "idx_source_labels") {
      cfg.idx_source_labels = value;
    } else if (key == "idx_target_images") {
      cfg.idx_target_images = value;
    } else if (key == "idx_target_labels") {
      cfg.idx_target_labels = value;
    } else if (key == "idx_subsample") {
      cfg.idx_subsample = parse_int(key, value);
    } else if (key == "idx_block_factor") {
      cfg.idx_block_factor = parse_int(key, value);
    } else if (key == "latent_dim") {
      cfg.train.arch.latent_dim = parse_int(key, value);
    } else if (key == "encoder_hidden") {
      cfg.train.arch.encoder_hidden = parse_int_list(key, value);
    } else if (key == "classifier_hidden") {
      cfg.train.arch.classifier_hidden = parse_int_list(key, value);
    } else if (key == "task_disc_hidden") {
      cfg.train.arch.task_disc_hidden = parse_int_list(key, value);
    } else if (key == "binary_disc_hidden") {
      cfg.train.arch.binary_disc_hidden = parse_int_list(key, value);
    } else if (key == "leaky_slope") {
      cfg.train.arch.leaky_slope = parse_double(key, value);
    } else if (key == "learning_rate") {
      cfg.train.adam.alpha = parse_double(key, value);
    } else if (key == "beta1") {
      cfg.train.adam.beta1 = parse_double(key, value);
    } else if (key == "beta2") {
      cfg.train.adam.beta2 = parse_double(key, value);
    } else if (key == "adam_epsilon") {
      cfg.train.adam.epsilon = parse_double(key, value);
    } else if (key == "lambda_q") {
      cfg.train.lambda_q = parse_double(key, value);
    } else if (key == "lambda_h") {
      cfg.train.lambda_h = parse_double(key, value);
    } else if (key == "lambda_h_prime") {
      cfg.train.lambda_h_prime = parse_double(key, value);
    } else if (key == "batch_size") {
      cfg.train.batch_size = parse_int(key, value);
    } else if (key == "epochs") {
      cfg.train.epochs = parse_int(key, value);
    } else if (key == "source_reg") {
      cfg.train.source_reg = parse_onoff(key, value);
    } else if (key == "target_reg") {
      cfg.train.target_reg = parse_onoff(key, value);
    } else if (key == "discriminator") {
      if (value == "task") cfg.train.discriminator = DiscMode::task;
      else if (value == "binary") cfg.train.discriminator = DiscMode::binary;
      else if (value == "none") cfg.train.discriminator = DiscMode::none;
      else throw ConfigError("config: discriminator must be task, binary or none");
    } else if (key == "seeds") {
      cfg.seeds = parse_seed_list(key, value);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "save_checkpoints") {
      cfg.save_checkpoints = parse_onoff(key, value);
    } else if (key == "export_embeddings") {
      cfg.export_embeddings = parse_onoff(key, value);
    } else if (key == "seed" || key == "arm") {
      // echo-only keys; accepted so an artifact's echo reparses cleanly
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  if (cfg.train.batch_size < 1) throw ConfigError("config: batch_size must be positive");
  if (cfg.train.epochs < 1) throw ConfigError("config: epochs must be positive");
  if (cfg.train.arch.latent_dim < 1) throw ConfigError("config: latent_dim must be positive");
  if (cfg.n_per_domain < 4) throw ConfigError("config: n_per_domain too small");
  if (cfg.dataset == "idx") {
    if (cfg.idx_source_images.empty() || cfg.idx_source_labels.empty() ||
        cfg.idx_target_images.empty() || cfg.idx_target_labels.empty())
      throw ConfigError("config: dataset=idx needs all four idx_* paths");
  }

  cfg.resolved = config_echo(cfg);
  return cfg;
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> echo;
  echo["dataset"] = cfg.dataset;
  echo["n_per_domain"] = std::to_string(cfg.n_per_domain);
  echo["moons_noise"] = format_double(cfg.moons_noise);
  echo["mixture_means"] = render_means(cfg.mixture_means);
  echo["mixture_n_per_class"] = std::to_string(cfg.mixture_n_per_class);
  echo["mixture_noise"] = format_double(cfg.mixture_noise);
  echo["shift_rotation_deg"] = format_double(cfg.shift.rotation_rad * 180.0 / kPi);
  echo["shift_scale"] = join_doubles(cfg.shift.scale);
  echo["shift_translate"] = join_doubles(cfg.shift.translate);
  echo["shift_noise_std"] = format_double(cfg.shift.noise_std);
  echo["idx_source_images"] = cfg.idx_source_images;
  echo["idx_source_labels"] = cfg.idx_source_labels;
  echo["idx_target_images"] = cfg.idx_target_images;
  echo["idx_target_labels"] = cfg.idx_target_labels;
  echo["idx_subsample"] = std::to_string(cfg.idx_subsample);
  echo["idx_block_factor"] = std::to_string(cfg.idx_block_factor);
  echo["latent_dim"] = std::to_string(cfg.train.arch.latent_dim);
  echo["encoder_hidden"] = join_ints(cfg.train.arch.encoder_hidden);
  echo["classifier_hidden"] = join_ints(cfg.train.arch.classifier_hidden);
  echo["task_disc_hidden"] = join_ints(cfg.train.arch.task_disc_hidden);
  echo["binary_disc_hidden"] = join_ints(cfg.train.arch.binary_disc_hidden);
  echo["leaky_slope"] = format_double(cfg.train.arch.leaky_slope);
  echo["learning_rate"] = format_double(cfg.train.adam.alpha);
  echo["beta1"] = format_double(cfg.train.adam.beta1);
  echo["beta2"] = format_double(cfg.train.adam.beta2);
  echo["adam_epsilon"] = format_double(cfg.train.adam.epsilon);
  echo["lambda_q"] = format_double(cfg.train.lambda_q);
  echo["lambda_h"] = format_double(cfg.train.lambda_h);
  echo["lambda_h_prime"] = format_double(cfg.train.lambda_h_prime);
  echo["batch_size"] = std::to_string(cfg.train.batch_size);
  echo["epochs"] = std::to_string(cfg.train.epochs);
  echo["source_reg"] = cfg.train.source_reg ? "on" : "off";
  echo["target_reg"] = cfg.train.target_reg ? "on" : "off";
  echo["discriminator"] = cfg.train.discriminator == DiscMode::task     ? "task"
                          : cfg.train.discriminator == DiscMode::binary ? "binary"
                                                                        : "none";
  echo["seeds"] = join_seeds(cfg.seeds);
  echo["out"] = cfg.out_dir;
  echo["save_checkpoints"] = cfg.save_checkpoints ? "on" : "off";
  echo["export_embeddings"] = cfg.export_embeddings ? "on" : "off";
  return echo;
}

std::pair<DomainDataset, DomainDataset> build_datasets(const ExperimentConfig& cfg,
                                                       std::uint64_t seed) {
  const Rng base(seed);
  const std::uint64_t src_seed = base.split(kStreamDataSource).next_u64();
  const std::uint64_t tgt_seed = base.split(kStreamDataTarget).next_u64();
  const std::uint64_t shift_seed = base.split(kStreamDataShift).next_u64();

  auto finish = [&](DomainDataset src, DomainDataset tgt) {
    src = rescale_inputs(src).retagged(Domain::source, false);
    tgt = rescale_inputs(tgt).retagged(Domain::target, true);
    return std::make_pair(std::move(src), std::move(tgt));
  };

  if (cfg.dataset == "two-moons") {
    DomainDataset src = make_two_moons(cfg.n_per_domain, cfg.moons_noise, src_seed);
    DomainDataset tgt = make_two_moons(cfg.n_per_domain, cfg.moons_noise, tgt_seed);
    if (!shift_is_identity(cfg.shift)) tgt = apply_shift(tgt, cfg.shift, shift_seed);
    return finish(std::move(src), std::move(tgt));
  }
  if (cfg.dataset == "gaussian-mixture") {
    DomainDataset src = make_gaussian_mixture(cfg.mixture_means, cfg.mixture_n_per_class,
                                              cfg.mixture_noise, src_seed);
    DomainDataset tgt = make_gaussian_mixture(cfg.mixture_means, cfg.mixture_n_per_class,
                                              cfg.mixture_noise, tgt_seed);
    if (!shift_is_identity(cfg.shift)) tgt = apply_shift(tgt, cfg.shift, shift_seed);
    return finish(std::move(src), std::move(tgt));
  }
  if (cfg.dataset == "idx") {
    Rng sub_rng = base.split(kStreamDataSubsample);
    const std::uint64_t sub_src_seed = sub_rng.next_u64();
    const std::uint64_t sub_tgt_seed = sub_rng.next_u64();
    auto load = [&](const std::string& images, const std::string& labels, Domain domain,
                    std::uint64_t sub_seed) {
      int h = 0, w = 0;
      Matrix x = read_idx_images(images, &h, &w);
      std::vector<int> y = read_idx_labels(labels);
      if (static_cast<int>(y.size()) != x.rows())
        throw IoError("idx: image/label count mismatch for '" + images + "'");
      int max_label = 0;
      for (int l : y) max_label = std::max(max_label, l);
      DomainDataset ds(std::move(x), std::move(y), max_label + 1, domain, DataKind::image,
                       "idx", false);
      if (cfg.idx_subsample > 0 && cfg.idx_subsample < ds.n())
        ds = subsample(ds, cfg.idx_subsample, sub_seed);
      if (cfg.idx_block_factor > 1) ds = block_average(ds, h, w, cfg.idx_block_factor);
      return ds;
    };
    DomainDataset src = load(cfg.idx_source_images, cfg.idx_source_labels, Domain::source,
                             sub_src_seed);
    DomainDataset tgt = load(cfg.idx_target_images, cfg.idx_target_labels, Domain::target,
                             sub_tgt_seed);
    if (src.num_classes() != tgt.num_classes())
      throw Error("idx: source and target class counts differ");
    return finish(std::move(src), std::move(tgt));
  }
  throw ConfigError("config: unknown dataset '" + cfg.dataset + "'");
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto [source, target] = build_datasets(cfg, seed);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  RunResult r;
  r.seed = seed;
  auto [model, history] = train(tc, source, target);
  r.model = std::move(model);
  r.history = std::move(history);
  r.source_acc = r.history.final_source_acc();
  r.target_acc = r.history.final_target_acc();
  return r;
}

ArmSummary summarize_arm(const std::string& arm, const std::vector<RunResult>& runs) {
  if (runs.empty()) throw Error("summarize_arm: no runs");
  ArmSummary s;
  s.arm = arm;
  for (const auto& r : runs) {
    s.seeds.push_back(r.seed);
    s.target_accs.push_back(r.target_acc);
    s.source_accs.push_back(r.source_acc);
  }
  auto mean_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  auto std_of = [](const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
  };
  s.target_mean = mean_of(s.target_accs);
  s.target_std = std_of(s.target_accs, s.target_mean);
  s.source_mean = mean_of(s.source_accs);
  s.source_std = std_of(s.source_accs, s.source_mean);
  return s;
}

ArmSummary run_experiment_arm(const ExperimentConfig& cfg, const std::string& arm,
                              bool write_artifacts) {
  std::vector<RunResult> runs;
  const fs::path arm_dir = fs::path(cfg.out_dir) / arm;
  if (write_artifacts) {
    std::error_code ec;
    fs::create_directories(arm_dir, ec);
    if (ec) throw IoError("cannot create '" + arm_dir.string() + "': " + ec.message());
  }
  for (std::uint64_t seed : cfg.seeds) {
    RunResult r = run_single(cfg, seed);
    if (write_artifacts) {
      auto echo = config_echo(cfg);
      echo["seed"] = std::to_string(seed);
      echo["arm"] = arm;
      const std::string tag = "seed" + std::to_string(seed);
      write_history_csv((arm_dir / ("history_" + tag + ".csv")).string(), r.history, echo);
      write_config_echo((arm_dir / ("config_" + tag + ".txt")).string(), echo);
      if (cfg.save_checkpoints)
        save_model((arm_dir / ("checkpoint_" + tag + ".ckpt")).string(), r.model,
                   render_config_echo(echo));
      if (cfg.export_embeddings) {
        auto [source, target] = build_datasets(cfg, seed);
        export_embedding_csv((arm_dir / ("embeddings_" + tag + ".csv")).string(), r.model,
                             source, target);
      }
    }
    runs.push_back(std::move(r));
  }
  return summarize_arm(arm, runs);
}

void write_summary_csv(const std::string& path, const std::vector<ArmSummary>& arms) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "arm,n_seeds,seeds,target_acc_mean,target_acc_std,source_acc_mean,source_acc_std\n";
  for (const auto& a : arms) {
    os << a.arm << ',' << a.seeds.size() << ',';
    for (std::size_t i = 0; i < a.seeds.size(); ++i) {
      if (i) os << ';';
      os << a.seeds[i];
    }
    os << ',' << format_double(a.target_mean) << ',' << format_double(a.target_std) << ','
       << format_double(a.source_mean) << ',' << format_double(a.source_std) << "\n";
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

std::vector<ArmSummary> run_ablation_suite(const ExperimentConfig& cfg, bool write_artifacts) {
  struct Arm {
    const char* name;
    bool source_reg;
    bool target_reg;
  };
  constexpr Arm arms[] = {
      {"full", true, true},
      {"wo-s", false, true},
      {"wo-t", true, false},
      {"wo-st", false, false},
  };
  std::vector<ArmSummary> out;
  for (const Arm& a : arms) {
    ExperimentConfig c = cfg;
    c.train.source_reg = a.source_reg;
    c.train.target_reg = a.target_reg;
    c.resolved = config_echo(c);
    out.push_back(run_experiment_arm(c, a.name, write_artifacts));
  }
  if (write_artifacts)
    write_summary_csv((fs::path(cfg.out_dir) / "summary.csv").string(), out);
  return out;
}

std::vector<ArmSummary> run_discriminator_comparison(const ExperimentConfig& cfg,
                                                     bool write_artifacts) {
  std::vector<ArmSummary> out;
  {
    ExperimentConfig c = cfg;
    c.train.discriminator = DiscMode::task;
    c.resolved = config_echo(c);
    out.push_back(run_experiment_arm(c, "task-d", write_artifacts));
  }
  {
    ExperimentConfig c = cfg;
    c.train.discriminator = DiscMode::binary;
    c.resolved = config_echo(c);
    out.push_back(run_experiment_arm(c, "adv-d", write_artifacts));
  }
  if (write_artifacts)
    write_summary_csv((fs::path(cfg.out_dir) / "summary.csv").string(), out);
  return out;
}

void export_embedding_csv(const std::string& path, const Model& m,
                          const DomainDataset& source, const DomainDataset& target) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  const int p = m.latent_dim();
  for (int j = 0; j < p; ++j) os << 'z' << j << ',';
  os << "domain,label,predicted\n";
  auto dump = [&](const DomainDataset& ds, const char* tag) {
    const Matrix z = encode_mean(m.encoder, ds.inputs());
    const std::vector<int> pred = predict(m, ds.inputs());
    const std::vector<int>* labels = ds.has_labels() ? &ds.evaluation_labels() : nullptr;
    for (int i = 0; i < ds.n(); ++i) {
      for (int j = 0; j < p; ++j) os << format_double(z(i, j)) << ',';
      os << tag << ',' << (labels ? (*labels)[i] : -1) << ',' << pred[i] << "\n";
    }
  };
  dump(source, "source");
  dump(target, "target");
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace tda
