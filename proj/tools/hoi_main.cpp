// Copyright 2026 The HOI Anticipation Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line surface: gen-data, train, infer, eval, bench, simulate.

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoi/bench.h"
#include "hoi/data.h"
#include "hoi/eval.h"
#include "hoi/model.h"
#include "hoi/sim.h"
#include "hoi/train.h"
#include "hoi/weights_io.h"

namespace {

using nlohmann::json;

hoi::ModelConfig load_model_config(const std::string& path) {
  hoi::ModelConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw hoi::ConfigError("cannot open config file: " + path);
  json j;
  in >> j;
  cfg.t_obs = j.value("t_obs", cfg.t_obs);
  cfg.grid_l = j.value("grid_l", cfg.grid_l);
  cfg.d_vis = j.value("d_vis", cfg.d_vis);
  cfg.d_box = j.value("d_box", cfg.d_box);
  cfg.depth = j.value("depth", cfg.depth);
  cfg.heads = j.value("heads", cfg.heads);
  cfg.mlp_ratio = j.value("mlp_ratio", cfg.mlp_ratio);
  cfg.dropout = j.value("dropout", cfg.dropout);
  if (j.contains("horizons")) cfg.horizons = j["horizons"].get<std::vector<int>>();
  cfg.num_classes = j.value("num_classes", cfg.num_classes);
  if (j.contains("variant")) cfg.variant = hoi::variant_from_string(j["variant"].get<std::string>());
  cfg.threshold = j.value("threshold", cfg.threshold);
  cfg.validate();
  return cfg;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

int run_gen_data(const std::string& out_path, const hoi::GenConfig& gen) {
  const auto clips = hoi::make_synthetic_dataset(gen);
  hoi::save_clips(out_path, clips);
  std::size_t labels = 0;
  for (const auto& c : clips) labels += c.labels.size();
  std::cout << "wrote " << clips.size() << " clips with " << labels << " label records to "
            << out_path << "\n";
  return 0;
}

struct TrainArgs {
  std::string stage = "detection";
  std::string data_path, out_path, init_path, config_path, curve_path;
  hoi::TrainSettings settings;
  std::uint64_t seed = hoi::kDefaultSeed;
};

int run_train(TrainArgs& args) {
  hoi::ModelConfig cfg = load_model_config(args.config_path);
  const auto clips = hoi::load_clips(args.data_path);
  std::vector<std::string> classes = hoi::scan_classes(clips);
  if (classes.empty()) throw hoi::ContractError("training data carries no labels");
  cfg.num_classes = classes.size();

  hoi::SyntheticBackbone backbone(cfg.grid_l, cfg.d_vis, hoi::kDefaultSeed);
  hoi::FeatureStore store(backbone);
  hoi::HashTextEmbedder embedder(cfg.token_width(), hoi::kDefaultSeed);

  hoi::ModelWeights weights;
  if (args.stage == "detection") {
    if (!args.init_path.empty()) {
      auto loaded = hoi::load_weights(args.init_path);
      weights = std::move(loaded.weights);
      classes = loaded.classes;
      cfg = weights.config;
    } else {
      weights = hoi::ModelWeights::init(cfg, args.seed);
    }
  } else if (args.stage == "hydra") {
    if (args.init_path.empty()) {
      throw hoi::ConfigError("hydra stage needs --init with the detection checkpoint");
    }
    auto loaded = hoi::load_weights_for_config(args.init_path, cfg, args.seed);
    weights = std::move(loaded.weights);
    classes = loaded.classes;
  } else {
    throw hoi::ConfigError("unknown stage '" + args.stage + "' (detection or hydra)");
  }

  const auto samples =
      hoi::build_train_samples(clips, classes, cfg, store, args.stage == "hydra");
  if (samples.empty()) throw hoi::ContractError("no usable training samples in " + args.data_path);

  // Per-class positive counts over the horizon-0 targets.
  args.settings.loss.class_counts.assign(cfg.num_classes, 0);
  for (const auto& s : samples) {
    const auto& y = s.targets.at(0);
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
      if (y[c] > 0.5f) args.settings.loss.class_counts[c]++;
    }
  }
  args.settings.class_names = classes;
  args.settings.opt.seed = args.seed;

  hoi::TrainResult result;
  if (args.stage == "detection") {
    result = hoi::train_detection(weights, cfg, samples, embedder, args.settings);
  } else {
    result = hoi::train_hydra(weights, cfg, samples, embedder, args.settings);
  }
  if (!args.curve_path.empty()) hoi::write_loss_curve(args.curve_path, result.curve);
  hoi::save_weights(weights, classes, args.out_path);
  std::cout << "stage " << args.stage << ": " << samples.size() << " samples, "
            << result.curve.size() << " epochs, final train mAP " << result.final_train_map
            << (result.aborted ? " (aborted on non-finite loss)" : "") << "\n";
  if (result.aborted) return 2;
  return 0;
}

int run_infer(const std::string& data_path, const std::string& weights_path,
              const std::string& out_path, const std::string& horizons_csv, double threshold) {
  auto loaded = hoi::load_weights(weights_path);
  hoi::ModelWeights& weights = loaded.weights;
  const hoi::ModelConfig& cfg = weights.config;
  std::vector<int> horizons = horizons_csv.empty() ? cfg.horizons : parse_int_list(horizons_csv);
  for (int tau : horizons) {
    if (std::find(cfg.horizons.begin(), cfg.horizons.end(), tau) == cfg.horizons.end()) {
      throw hoi::ConfigError("horizon " + std::to_string(tau) +
                             " has no trained head in this checkpoint");
    }
  }
  const auto clips = hoi::load_clips(data_path);
  hoi::SyntheticBackbone backbone(cfg.grid_l, cfg.d_vis, hoi::kDefaultSeed);
  hoi::HashTextEmbedder embedder(cfg.token_width(), hoi::kDefaultSeed);

  hoi::PredictionFile pf;
  pf.classes = loaded.classes;
  for (const auto& clip : clips) {
    const hoi::ClipFeatures features = hoi::clip_features_for(clip, backbone);
    for (std::int64_t ref : clip.frames) {
      std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
      for (const auto& h : clip.tracks) {
        if (h.kind != hoi::EntityKind::kHuman || !h.box_at(ref)) continue;
        for (const auto& o : clip.tracks) {
          if (o.kind != hoi::EntityKind::kObject || !o.box_at(ref)) continue;
          pairs.emplace_back(h.track_id, o.track_id);
        }
      }
      auto preds = hoi::model_forward(weights, cfg, features, clip.clip_id, clip.tracks, pairs,
                                      ref, embedder);
      for (auto& p : preds) {
        // Keep only the requested horizons.
        std::map<int, std::vector<float>> kept;
        for (int tau : horizons) kept[tau] = p.probs.at(tau);
        p.probs = std::move(kept);
        pf.predictions.push_back(std::move(p));
      }
    }
  }
  pf.threshold = threshold;
  hoi::save_predictions(out_path, pf);
  std::size_t above = 0;
  for (const auto& p : pf.predictions) {
    for (const auto& [tau, row] : p.probs) {
      for (float v : row) above += v > threshold ? 1 : 0;
    }
  }
  std::cout << "wrote " << pf.predictions.size() << " pair predictions to " << out_path << " ("
            << above << " class scores above threshold " << threshold << ")\n";
  return 0;
}

int run_eval(const std::string& preds_path, const std::string& gt_path,
             const std::string& out_path, const hoi::EvalConfig& cfg) {
  const auto pf = hoi::load_predictions(preds_path);
  const auto clips = hoi::load_clips(gt_path);
  std::set<int> horizon_set;
  for (const auto& p : pf.predictions) {
    for (const auto& [tau, row] : p.probs) horizon_set.insert(tau);
  }
  const std::vector<int> horizons(horizon_set.begin(), horizon_set.end());
  const auto preds = hoi::prediction_triplets(pf, clips, cfg.mode);
  const auto gts = hoi::gt_triplets(clips, horizons);
  const hoi::EvalReport report = hoi::evaluate(preds, gts, cfg);
  hoi::write_eval_report(out_path, report);
  std::cout << "map_full=" << (report.map.full ? std::to_string(*report.map.full) : "n/a")
            << " map_nonrare="
            << (report.map.nonrare ? std::to_string(*report.map.nonrare) : "n/a")
            << " map_rare=" << (report.map.rare ? std::to_string(*report.map.rare) : "n/a")
            << " topk_f1=" << report.topk.f1 << "\n";
  return 0;
}

int run_bench(const std::string& weights_path, const std::string& out_path,
              const std::string& pairs_csv, std::size_t repeats, std::size_t warmup,
              std::uint64_t seed) {
  auto loaded = hoi::load_weights(weights_path);
  std::vector<std::size_t> counts;
  for (int v : parse_int_list(pairs_csv)) counts.push_back(static_cast<std::size_t>(v));
  const hoi::BenchResult result =
      hoi::bench(loaded.weights, loaded.weights.config, counts, repeats, warmup, seed);
  hoi::write_bench_result(out_path, result);
  for (const auto& p : result.points) {
    std::cout << "pairs " << p.pairs << ": " << p.mean_ms << " ms (std " << p.std_ms << ")\n";
  }
  if (result.has_fit) {
    std::cout << "fit: " << result.slope_ms_per_pair << " ms/pair + " << result.intercept_ms
              << " ms, r2 " << result.r2 << "\n";
  }
  return 0;
}

int run_simulate(const std::string& out_path, const std::string& taus_csv,
                 const std::string& thresholds_csv, std::size_t episodes, double noise,
                 std::uint64_t seed) {
  const std::vector<int> taus = parse_int_list(taus_csv);
  const std::vector<double> thresholds = parse_double_list(thresholds_csv);
  if (taus.empty() || thresholds.empty() || episodes == 0) {
    throw hoi::ContractError("simulate needs at least one tau, one threshold, and one episode");
  }
  std::ofstream out(out_path);
  if (!out) throw hoi::ContractError("cannot open fluency output file: " + out_path);
  out << "threshold,tau,h_idle,r_idle,c_act,f_del,waiting_time\n";
  for (double thr : thresholds) {
    for (int tau : taus) {
      hoi::Scenario sc;
      sc.threshold = thr;
      sc.tau_a = tau;
      sc.noise = noise;
      double h = 0, r = 0, c = 0, f = 0, wt = 0;
      for (std::size_t ep = 0; ep < episodes; ++ep) {
        const std::uint64_t ep_seed = hoi::hash_coords(
            seed, ep, static_cast<std::uint64_t>(tau), static_cast<std::uint64_t>(thr * 1000));
        const hoi::Timeline tl = hoi::simulate(sc, ep_seed);
        const hoi::FluencyReport fr = hoi::fluency(tl);
        h += fr.h_idle;
        r += fr.r_idle;
        c += fr.c_act;
        f += fr.f_del;
        wt += fr.waiting_time;
      }
      const double n = static_cast<double>(episodes);
      out << thr << "," << tau << "," << h / n << "," << r / n << "," << c / n << "," << f / n
          << "," << wt / n << "\n";
      std::cout << "threshold " << thr << " tau " << tau << ": waiting " << wt / n << " s\n";
    }
  }
  std::cout << "wrote fluency grid to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"human-object interaction anticipation engine"};
  app.require_subcommand(1);

  // gen-data
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic labeled dataset");
  std::string gen_out = "clips.jsonl";
  hoi::GenConfig gen;
  gen_cmd->add_option("--out", gen_out, "output clips file");
  gen_cmd->add_option("--clips", gen.clips, "number of clips");
  gen_cmd->add_option("--frames", gen.frames, "frames per clip");
  gen_cmd->add_option("--min-objects", gen.min_objects, "minimum objects per clip");
  gen_cmd->add_option("--max-objects", gen.max_objects, "maximum objects per clip");
  gen_cmd->add_option("--motion-scale", gen.motion_scale, "path length scale");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the detection or hydra stage");
  TrainArgs targs;
  train_cmd->add_option("--stage", targs.stage, "detection or hydra");
  train_cmd->add_option("--data", targs.data_path, "clips file")->required();
  train_cmd->add_option("--out", targs.out_path, "output checkpoint")->required();
  train_cmd->add_option("--init", targs.init_path, "initial checkpoint");
  train_cmd->add_option("--config", targs.config_path, "model config JSON");
  train_cmd->add_option("--curve", targs.curve_path, "loss curve CSV output");
  train_cmd->add_option("--epochs", targs.settings.opt.epochs, "training epochs");
  train_cmd->add_option("--warmup-epochs", targs.settings.opt.warmup_epochs, "warmup epochs");
  train_cmd->add_option("--batch-size", targs.settings.opt.batch_size, "batch size");
  train_cmd->add_option("--peak-lr", targs.settings.opt.peak_lr, "peak learning rate");
  train_cmd->add_option("--weight-decay", targs.settings.opt.weight_decay, "weight decay");
  train_cmd->add_option("--flip-prob", targs.settings.opt.flip_prob, "flip augmentation rate");
  train_cmd->add_option("--oversample", targs.settings.opt.oversample_weight,
                        "weight for samples whose interactions change");
  train_cmd->add_option("--gamma", targs.settings.loss.gamma, "focal exponent");
  train_cmd->add_option("--beta", targs.settings.loss.beta, "class-balance factor");
  train_cmd->add_option("--eval-every", targs.settings.eval_every, "mAP evaluation cadence");
  train_cmd->add_option("--target-map", targs.settings.target_map, "early-stop train mAP");
  train_cmd->add_option("--seed", targs.seed, "seed");

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "write pair predictions for a clips file");
  std::string infer_data, infer_weights, infer_out = "predictions.jsonl", infer_horizons;
  double infer_threshold = 0.5;
  infer_cmd->add_option("--data", infer_data, "clips file")->required();
  infer_cmd->add_option("--weights", infer_weights, "checkpoint")->required();
  infer_cmd->add_option("--out", infer_out, "predictions output");
  infer_cmd->add_option("--horizons", infer_horizons, "comma-separated horizons");
  infer_cmd->add_option("--threshold", infer_threshold, "classification threshold");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  std::string eval_preds, eval_gt, eval_out = "report.json", eval_mode = "oracle";
  hoi::EvalConfig ecfg;
  eval_cmd->add_option("--preds", eval_preds, "predictions file")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth clips file")->required();
  eval_cmd->add_option("--out", eval_out, "report output");
  eval_cmd->add_option("--iou", ecfg.iou_threshold, "IoU threshold");
  eval_cmd->add_option("--topk", ecfg.top_k, "person-wise top-k");
  eval_cmd->add_option("--rare-cutoff", ecfg.rare_cutoff, "rare class cutoff");
  eval_cmd->add_option("--mode", eval_mode, "oracle or detection");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "latency scaling benchmark");
  std::string bench_weights, bench_out = "bench.json";
  std::string bench_pairs = "1,2,4,8,16,32,64,128";
  std::size_t bench_repeats = 50, bench_warmup = 10;
  std::uint64_t bench_seed = hoi::kDefaultSeed;
  bench_cmd->add_option("--weights", bench_weights, "checkpoint")->required();
  bench_cmd->add_option("--out", bench_out, "benchmark output");
  bench_cmd->add_option("--pairs", bench_pairs, "comma-separated pair counts");
  bench_cmd->add_option("--repeats", bench_repeats, "timing repeats per count");
  bench_cmd->add_option("--warmup", bench_warmup, "untimed warmup iterations");
  bench_cmd->add_option("--seed", bench_seed, "seed");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "sweep the bartender scenario grid");
  std::string sim_out = "fluency.csv", sim_taus = "0,1,3,5", sim_thresholds = "0.3,0.5,0.7";
  std::size_t sim_episodes = 20;
  double sim_noise = 0.05;
  std::uint64_t sim_seed = hoi::kDefaultSeed;
  sim_cmd->add_option("--out", sim_out, "fluency table output");
  sim_cmd->add_option("--taus", sim_taus, "anticipation horizons");
  sim_cmd->add_option("--thresholds", sim_thresholds, "confidence thresholds");
  sim_cmd->add_option("--episodes", sim_episodes, "episodes per grid cell");
  sim_cmd->add_option("--noise", sim_noise, "confidence noise sigma");
  sim_cmd->add_option("--seed", sim_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_data(gen_out, gen);
    if (train_cmd->parsed()) return run_train(targs);
    if (infer_cmd->parsed()) {
      return run_infer(infer_data, infer_weights, infer_out, infer_horizons, infer_threshold);
    }
    if (eval_cmd->parsed()) {
      if (eval_mode == "oracle") {
        ecfg.mode = hoi::EvalMode::kOracle;
      } else if (eval_mode == "detection") {
        ecfg.mode = hoi::EvalMode::kDetection;
      } else {
        throw hoi::ConfigError("unknown eval mode '" + eval_mode + "'");
      }
      return run_eval(eval_preds, eval_gt, eval_out, ecfg);
    }
    if (bench_cmd->parsed()) {
      return run_bench(bench_weights, bench_out, bench_pairs, bench_repeats, bench_warmup,
                       bench_seed);
    }
    if (sim_cmd->parsed()) {
      return run_simulate(sim_out, sim_taus, sim_thresholds, sim_episodes, sim_noise, sim_seed);
    }
  } catch (const hoi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hoi::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hoi::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hoi::WeightsFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
