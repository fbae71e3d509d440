// Copyright 2026 The stylematch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stylematch/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include "json.hpp"
#include "stylematch/io.hpp"
#include "stylematch/sinkhorn.hpp"

namespace stylematch::runner {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double EvalReport::tpr_at(double level) const {
  for (const auto& rp : tpr)
    if (rp.level == level) return rp.value;
  throw ConfigError("tpr_at: level not evaluated");
}

double EvalReport::tpir_at(double level) const {
  for (const auto& rp : tpir)
    if (rp.level == level) return rp.value;
  throw ConfigError("tpir_at: level not evaluated");
}

std::vector<Tensor> extract_embeddings(const std::vector<Tensor>& images,
                                       const net::BackboneConfig& cfg,
                                       const net::BackboneParams& params) {
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (const Tensor& img : images)
    out.push_back(net::forward(img, cfg, params, nullptr).embedding);
  return out;
}

namespace {

Tensor fused_for(const datagen::TemplateDef& tpl,
                 const std::vector<Tensor>& embeddings) {
  std::vector<std::vector<Tensor>> media;
  for (const auto& m : tpl.media) {
    std::vector<Tensor> frames;
    for (int64_t idx : m) frames.push_back(embeddings[static_cast<size_t>(idx)]);
    media.push_back(std::move(frames));
  }
  return eval::fuse_template(media);
}

}  // namespace

EvalReport evaluate_model(const datagen::DatasetBundle& ds,
                          const net::BackboneConfig& cfg,
                          const net::BackboneParams& bp,
                          const net::ClassifierParams& cp) {
  (void)cp;
  EvalReport report;
  std::vector<Tensor> emb = extract_embeddings(ds.target_images, cfg, bp);

  // verification: fused template scores
  std::map<int64_t, Tensor> fused;
  for (const auto& tpl : ds.templates) fused[tpl.id] = fused_for(tpl, emb);

  std::vector<double> pos, neg;
  for (const auto& pair : ds.pairs) {
    double s = eval::cosine(fused.at(pair.template_a), fused.at(pair.template_b));
    (pair.label ? pos : neg).push_back(s);
  }
  report.tpr = eval::tpr_at_fpr(pos, neg, kFprLevels);

  std::vector<eval::PairScore> fold_pairs;
  for (size_t f = 0; f < ds.folds.size(); ++f)
    for (const auto& pair : ds.folds[f])
      fold_pairs.push_back(
          {eval::cosine(fused.at(pair.template_a), fused.at(pair.template_b)),
           pair.label == 1, static_cast<int>(f)});
  report.kfold =
      eval::kfold_verification(fold_pairs, static_cast<int>(ds.folds.size()));

  // identification
  std::vector<eval::SubjectEmbedding> gallery, known, unknown;
  for (const auto& tpl : ds.gallery_templates)
    gallery.push_back({fused_for(tpl, emb), tpl.subject});
  for (const auto& tpl : ds.known_probe_templates)
    known.push_back({fused_for(tpl, emb), tpl.subject});
  for (const auto& tpl : ds.unknown_probe_templates)
    unknown.push_back({fused_for(tpl, emb), tpl.subject});
  report.rank_accuracy = eval::rank_k(known, gallery, kRanks);
  report.tpir = eval::tpir_at_fpir(known, unknown, gallery, kFpirLevels);

  report.embed = net::embed_stats(emb, ds.target_subjects);
  return report;
}

namespace {

json rate_to_json(const eval::RatePoint& rp) {
  json j;
  j["level"] = rp.level;
  j["threshold"] = rp.threshold;
  j["value"] = rp.value;
  j["unreachable"] = rp.unreachable;
  return j;
}

json report_to_json(const EvalReport& r) {
  json j;
  j["tpr_at_fpr"] = json::array();
  for (const auto& rp : r.tpr) j["tpr_at_fpr"].push_back(rate_to_json(rp));
  j["kfold"] = {{"mean_accuracy", r.kfold.mean_accuracy},
                {"sd", r.kfold.sd},
                {"fold_accuracy", r.kfold.fold_accuracy}};
  j["rank"] = json::array();
  for (size_t i = 0; i < kRanks.size(); ++i)
    j["rank"].push_back(
        {{"k", kRanks[i]}, {"accuracy", r.rank_accuracy[i]}});
  j["tpir_at_fpir"] = json::array();
  for (const auto& rp : r.tpir) j["tpir_at_fpir"].push_back(rate_to_json(rp));
  json e;
  e["intra_cos_mean"] = r.embed.intra_cos.mean;
  e["intra_cos_sd"] = r.embed.intra_cos.sd;
  e["inter_defined"] = r.embed.inter_defined;
  e["inter_cos_mean"] = r.embed.inter_cos.mean;
  e["inter_cos_sd"] = r.embed.inter_cos.sd;
  e["norm_mean"] = r.embed.norm.mean;
  e["norm_sd"] = r.embed.norm.sd;
  j["embed_stats"] = std::move(e);
  return j;
}

void report_csv_rows(std::ofstream& out, const EvalReport& r,
                     const std::string& prefix) {
  auto row = [&](const std::string& protocol, const std::string& level,
                 const std::string& threshold, double value,
                 const std::string& flag) {
    out << prefix << protocol << ',' << level << ',' << threshold << ','
        << io::format_double(value) << ',' << flag << '\n';
  };
  for (const auto& rp : r.tpr)
    row("tpr_at_fpr", io::format_double(rp.level),
        io::format_double(rp.threshold), rp.value,
        rp.unreachable ? "unreachable" : "");
  row("kfold_accuracy_mean", "", "", r.kfold.mean_accuracy, "");
  row("kfold_accuracy_sd", "", "", r.kfold.sd, "");
  for (size_t i = 0; i < kRanks.size(); ++i)
    row("rank_accuracy", std::to_string(kRanks[i]), "", r.rank_accuracy[i],
        "");
  for (const auto& rp : r.tpir)
    row("tpir_at_fpir", io::format_double(rp.level),
        io::format_double(rp.threshold), rp.value,
        rp.unreachable ? "unreachable" : "");
  row("embed_intra_cos_mean", "", "", r.embed.intra_cos.mean, "");
  row("embed_intra_cos_sd", "", "", r.embed.intra_cos.sd, "");
  if (r.embed.inter_defined) {
    row("embed_inter_cos_mean", "", "", r.embed.inter_cos.mean, "");
    row("embed_inter_cos_sd", "", "", r.embed.inter_cos.sd, "");
  }
  row("embed_norm_mean", "", "", r.embed.norm.mean, "");
  row("embed_norm_sd", "", "", r.embed.norm.sd, "");
}

}  // namespace

void write_report(const EvalReport& report, const std::string& csv_path,
                  const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write report: " + csv_path);
  csv << "protocol,level,threshold,value,flag\n";
  report_csv_rows(csv, report, "");
  if (!csv) throw IoError("report write failed: " + csv_path);

  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write report: " + json_path);
  js << report_to_json(report).dump(2) << '\n';
  if (!js) throw IoError("report write failed: " + json_path);
}

namespace {

net::LabeledImageSet source_set(const datagen::DatasetBundle& ds) {
  return {ds.source_images, ds.source_labels};
}

disc::TrainResult train_disc_for(const datagen::DatasetBundle& ds,
                                 const config::RunConfig& cfg) {
  disc::Config dcfg = disc::Config::desk_default();
  Rng rng(cfg.seed);
  Rng drng = rng.split(41);
  return disc::train_discriminator(ds.source_images, ds.target_images, dcfg,
                                   cfg.disc, drng);
}

void write_model(const std::string& path, const net::BackboneParams& bp,
                 const net::ClassifierParams& cp) {
  io::write_weights(path, io::named_params(bp, cp));
}

}  // namespace

AblationResult run_ablation(const datagen::DatasetBundle& ds,
                            const config::RunConfig& cfg,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  net::BackboneConfig bcfg =
      net::BackboneConfig::desk_default(ds.config.n_source_identities);
  net::LabeledImageSet source = source_set(ds);

  AblationResult result;

  // one shared baseline checkpoint; every adaptation forks from it
  Rng base_rng(cfg.seed);
  result.baseline = net::train_baseline(source, bcfg, cfg.train, base_rng);
  const std::string base_path =
      (fs::path(out_dir) / "baseline_weights.bin").string();
  write_model(base_path, result.baseline.backbone, result.baseline.classifier);
  result.baseline_weights_hash = io::fnv1a_file(base_path);

  // discriminator, trained once, reused by every ps row
  bool needs_disc = false;
  for (const std::string& m : cfg.ablation_modes)
    if (m == "ps" || m == "ps+sm") needs_disc = true;
  disc::Config dcfg = disc::Config::desk_default();
  disc::Params dparams;
  if (needs_disc) {
    disc::TrainResult dres = train_disc_for(ds, cfg);
    dparams = std::move(dres.params);
    io::write_weights((fs::path(out_dir) / "disc_weights.bin").string(),
                      io::named_params(dparams));
  }

  std::vector<std::pair<std::string, int>> jobs;  // label, lf (0 = config)
  for (const std::string& m : cfg.ablation_modes) {
    if (m == "sm" && cfg.ablation_lf_sweep) {
      for (int lf = 1; lf <= 4; ++lf)
        jobs.emplace_back("sm_lf" + std::to_string(lf), lf);
    } else {
      jobs.emplace_back(m, 0);
    }
  }

  uint64_t job_index = 0;
  for (const auto& [label, lf_override] : jobs) {
    ++job_index;
    EvalReport report;
    if (label == "baseline") {
      report = evaluate_model(ds, bcfg, result.baseline.backbone,
                              result.baseline.classifier);
    } else {
      net::TrainConfig tc = cfg.train;
      std::string mode_name = label.substr(0, label.find("_lf"));
      tc.mode = net::mode_from_string(mode_name);
      if (lf_override > 0) tc.taps_used = lf_override;
      Rng mode_rng = Rng(cfg.seed).split(9000 + job_index);
      net::TrainResult adapted = net::adapt(
          result.baseline.backbone, result.baseline.classifier, source,
          ds.target_images, bcfg, tc, mode_rng,
          needs_disc ? &dcfg : nullptr, needs_disc ? &dparams : nullptr);
      write_model(
          (fs::path(out_dir) / (label + "_weights.bin")).string(),
          adapted.backbone, adapted.classifier);
      io::write_curves_csv(
          (fs::path(out_dir) / (label + "_curves.csv")).string(),
          adapted.curves);
      report = evaluate_model(ds, bcfg, adapted.backbone, adapted.classifier);
    }
    result.rows.push_back({label, std::move(report)});
  }

  // table: rows = modes, columns = metrics
  std::ofstream table(fs::path(out_dir) / "ablation.csv");
  if (!table) throw IoError("cannot write ablation table in " + out_dir);
  table << "mode";
  for (double level : kFprLevels)
    table << ",tpr_at_fpr_" << io::format_double(level);
  table << ",kfold_accuracy";
  for (int k : kRanks) table << ",rank_" << k;
  for (double level : kFpirLevels)
    table << ",tpir_at_fpir_" << io::format_double(level);
  table << ",intra_cos,inter_cos,embed_norm\n";
  for (const AblationRow& row : result.rows) {
    table << row.label;
    for (const auto& rp : row.report.tpr)
      table << ',' << io::format_double(rp.value);
    table << ',' << io::format_double(row.report.kfold.mean_accuracy);
    for (double v : row.report.rank_accuracy)
      table << ',' << io::format_double(v);
    for (const auto& rp : row.report.tpir)
      table << ',' << io::format_double(rp.value);
    table << ',' << io::format_double(row.report.embed.intra_cos.mean) << ','
          << io::format_double(row.report.embed.inter_cos.mean) << ','
          << io::format_double(row.report.embed.norm.mean) << '\n';
  }
  if (!table) throw IoError("ablation table write failed in " + out_dir);

  json j;
  j["baseline_weights_hash"] = result.baseline_weights_hash;
  j["rows"] = json::array();
  for (const AblationRow& row : result.rows) {
    json rj;
    rj["mode"] = row.label;
    rj["report"] = report_to_json(row.report);
    j["rows"].push_back(std::move(rj));
  }
  std::ofstream js(fs::path(out_dir) / "ablation.json");
  if (!js) throw IoError("cannot write ablation json in " + out_dir);
  js << j.dump(2) << '\n';
  return result;
}

// ---------------------------------------------------------------- commands

namespace {

int guard(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  }
}

void ensure_out(const config::RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
  config::echo_config(cfg,
                      (fs::path(cfg.out_dir) / "config_resolved.cfg").string());
}

}  // namespace

int cmd_datagen(const config::RunConfig& cfg) {
  return guard([&] {
    ensure_out(cfg);
    datagen::GenerateConfig gc = cfg.dataset;
    gc.seed = cfg.seed;
    datagen::DatasetBundle ds = datagen::generate(gc);
    io::write_dataset((fs::path(cfg.out_dir) / "dataset").string(), ds);
    std::printf("dataset: %zu source images, %zu target images, %zu pairs\n",
                ds.source_images.size(), ds.target_images.size(),
                ds.pairs.size());
  });
}

int cmd_train(const config::RunConfig& cfg) {
  return guard([&] {
    if (cfg.data_dir.empty())
      throw ConfigError("train: 'data' must point at a dataset directory");
    const bool with_ps =
        cfg.train.mode == net::Mode::Ps || cfg.train.mode == net::Mode::PsSm;
    if (with_ps && cfg.disc_weights.empty())
      throw ConfigError(
          "train: ps modes need 'disc.weights' (train-discriminator first)");
    ensure_out(cfg);
    datagen::DatasetBundle ds = io::load_dataset(cfg.data_dir);
    net::BackboneConfig bcfg =
        net::BackboneConfig::desk_default(ds.config.n_source_identities);

    disc::Config dcfg = disc::Config::desk_default();
    disc::Params dparams;
    if (with_ps) {
      Rng tmp(0);
      dparams = disc::init_params(dcfg, tmp);
      io::load_weights(cfg.disc_weights, dparams);
    }

    Rng rng(cfg.seed);
    net::TrainResult res = net::train(
        source_set(ds), ds.target_images, bcfg, cfg.train, rng,
        with_ps ? &dcfg : nullptr, with_ps ? &dparams : nullptr);
    write_model((fs::path(cfg.out_dir) / "weights.bin").string(), res.backbone,
                res.classifier);
    io::write_curves_csv((fs::path(cfg.out_dir) / "curves.csv").string(),
                         res.curves);
    std::printf("trained mode=%s, weights written to %s\n",
                net::to_string(cfg.train.mode).c_str(),
                (fs::path(cfg.out_dir) / "weights.bin").string().c_str());
  });
}

int cmd_train_discriminator(const config::RunConfig& cfg) {
  return guard([&] {
    if (cfg.data_dir.empty())
      throw ConfigError(
          "train-discriminator: 'data' must point at a dataset directory");
    ensure_out(cfg);
    datagen::DatasetBundle ds = io::load_dataset(cfg.data_dir);
    disc::TrainResult res = train_disc_for(ds, cfg);
    io::write_weights((fs::path(cfg.out_dir) / "disc_weights.bin").string(),
                      io::named_params(res.params));

    disc::Config dcfg = disc::Config::desk_default();
    std::vector<std::string> ids, domains;
    std::vector<double> scores;
    for (size_t i = 0; i < ds.source_images.size(); ++i) {
      ids.push_back("s" + std::to_string(i));
      domains.push_back("source");
      scores.push_back(disc::score(ds.source_images[i], dcfg, res.params));
    }
    for (size_t i = 0; i < ds.target_images.size(); ++i) {
      ids.push_back("t" + std::to_string(i));
      domains.push_back("target");
      scores.push_back(disc::score(ds.target_images[i], dcfg, res.params));
    }
    disc::export_scores_csv(
        (fs::path(cfg.out_dir) / "disc_scores.csv").string(), ids, domains,
        scores);
    std::printf("discriminator trained, final epoch loss %s\n",
                io::format_double(res.loss_per_epoch.back()).c_str());
  });
}

int cmd_eval(const config::RunConfig& cfg) {
  return guard([&] {
    if (cfg.data_dir.empty())
      throw ConfigError("eval: 'data' must point at a dataset directory");
    if (cfg.weights.empty())
      throw ConfigError("eval: 'weights' must point at a weight file");
    ensure_out(cfg);
    datagen::DatasetBundle ds = io::load_dataset(cfg.data_dir);
    net::BackboneConfig bcfg =
        net::BackboneConfig::desk_default(ds.config.n_source_identities);
    Rng tmp(0);
    net::BackboneParams bp = net::init_backbone(bcfg, tmp);
    net::ClassifierParams cp = net::init_classifier(bcfg, tmp);
    io::load_weights(cfg.weights, bp, cp);
    EvalReport report = evaluate_model(ds, bcfg, bp, cp);
    write_report(report, (fs::path(cfg.out_dir) / "report.csv").string(),
                 (fs::path(cfg.out_dir) / "report.json").string());
    std::printf("tpr@fpr=0.01: %s   tpir@fpir=0.01: %s\n",
                io::format_double(report.tpr_at(1e-2)).c_str(),
                io::format_double(report.tpir_at(1e-2)).c_str());
  });
}

int cmd_ablation(const config::RunConfig& cfg) {
  return guard([&] {
    if (cfg.data_dir.empty())
      throw ConfigError("ablation: 'data' must point at a dataset directory");
    ensure_out(cfg);
    datagen::DatasetBundle ds = io::load_dataset(cfg.data_dir);
    AblationResult res = run_ablation(ds, cfg, cfg.out_dir);
    std::printf("%-12s %10s %10s\n", "mode", "tpr@1e-2", "tpir@1e-1");
    for (const AblationRow& row : res.rows)
      std::printf("%-12s %10.4f %10.4f\n", row.label.c_str(),
                  row.report.tpr_at(1e-2), row.report.tpir_at(1e-1));
  });
}

int cmd_sinkhorn_check(uint64_t seed, bool verbose) {
  using namespace stylematch::sinkhorn;
  Rng rng(seed);
  int fails_stated = 0, fails_props = 0, fails_converged = 0;
  double worst_stated = 0.0;
  const int instances = 200;
  for (int rep = 0; rep < instances; ++rep) {
    int64_t n = 2 + rng.next_int(4);
    int64_t d = 1 + rng.next_int(4);
    Tensor pp({n, d}), qq({n, d});
    for (auto& v : pp.values()) v = rng.uniform(-1.0, 1.0);
    for (auto& v : qq.values()) v = rng.uniform(-1.0, 1.0);
    Measure p(pp), q(qq);
    double mc = mean(cost_matrix(p, q));
    double eps = 1e-3 * mc;
    double want = exact_ot_bruteforce(p, q);
    double got200 = regularized_ot(p, q, eps, 200);
    double rel200 = std::abs(got200 - want) / std::max(std::abs(want), 1e-12);
    worst_stated = std::max(worst_stated, rel200);
    if (rel200 > 0.05) ++fails_stated;
    double got_conv = regularized_ot(p, q, eps, 20000);
    if (std::abs(got_conv - want) / std::max(std::abs(want), 1e-12) > 0.05)
      ++fails_converged;

    double div_eps = 0.5 * mc;
    double div = sinkhorn_divergence(p, q, div_eps, 10);
    if (div < -1e-8) ++fails_props;
    if (std::abs(div - sinkhorn_divergence(q, p, div_eps, 10)) > 1e-9)
      ++fails_props;
    if (std::abs(sinkhorn_divergence(p, p, div_eps, 10)) > 1e-9)
      ++fails_props;
    if (verbose && rel200 > 0.05)
      std::printf("  instance %d (n=%lld d=%lld): rel err %.3f at L=200\n",
                  rep, static_cast<long long>(n), static_cast<long long>(d),
                  rel200);
  }
  std::printf("[%s] eps->0 vs bruteforce at L=200 (stated budget): %d/%d "
              "instances outside 5%% (worst %.3f)\n",
              fails_stated == 0 ? "PASS" : "FAIL", fails_stated, instances,
              worst_stated);
  std::printf("[%s] eps->0 vs bruteforce at converged budget L=20000: %d/%d "
              "outside 5%%\n",
              fails_converged == 0 ? "PASS" : "FAIL", fails_converged,
              instances);
  std::printf("[%s] divergence nonnegativity/symmetry/self-distance: %d "
              "violations\n",
              fails_props == 0 ? "PASS" : "FAIL", fails_props);
  return (fails_stated == 0 && fails_props == 0 && fails_converged == 0) ? 0
                                                                         : 1;
}

int run_command(const std::string& command, const config::RunConfig& cfg) {
  if (command == "datagen") return cmd_datagen(cfg);
  if (command == "train") return cmd_train(cfg);
  if (command == "train-discriminator") return cmd_train_discriminator(cfg);
  if (command == "eval") return cmd_eval(cfg);
  if (command == "ablation") return cmd_ablation(cfg);
  if (command == "sinkhorn-check") return cmd_sinkhorn_check(cfg.seed, false);
  std::fprintf(stderr, "unknown command: %s\n", command.c_str());
  return 2;
}

}  // namespace stylematch::runner
