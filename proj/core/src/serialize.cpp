#include "ppffm/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "ppffm/errors.hpp"
#include "ppffm/version.hpp"

namespace ppffm {
namespace {

using nlohmann::json;

void append_meta(std::string* out, const Metadata& meta) {
  for (const auto& [key, value] : meta) {
    *out += "# ";
    *out += key;
    *out += "=";
    *out += value;
    *out += "\n";
  }
}

void append_row(std::string* out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) *out += ",";
    *out += format_double(values[i]);
  }
  *out += "\n";
}

json prior_to_json(const PriorSpec& prior) {
  json p;
  p["k"] = {prior.k.lo, prior.k.hi};
  p["tf"] = {{"lo", prior.tf.lo},
             {"hi", prior.tf.hi},
             {"absolute", prior.tf_is_absolute}};
  if (prior.p_kind == PPriorKind::LogNormal) {
    p["p"] = {{"kind", "lognormal"}, {"mu", prior.p_mu}, {"sigma", prior.p_sigma}};
  } else {
    p["p"] = {{"kind", "uniform"}, {"lo", prior.p_box.lo}, {"hi", prior.p_box.hi}};
  }
  p["shape"] = {prior.shape.lo, prior.shape.hi};
  if (prior.pinned_tf) {
    p["pinned_tf"] = *prior.pinned_tf;
  } else {
    p["pinned_tf"] = nullptr;
  }
  return p;
}

}  // namespace

std::string format_double(double v) {
  // Shortest representation that parses back to the same bits.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string posterior_to_json(const PosteriorRun& run, const Metadata& meta) {
  json doc;
  doc["meta"] = json::object();
  for (const auto& [key, value] : meta) doc["meta"][key] = value;
  doc["version"] = kVersion;

  doc["model"] = {{"family", family_name(run.model.family)}};
  doc["prior"] = prior_to_json(run.prior);
  doc["sampler_config"] = {{"iterations", run.config.iterations},
                           {"burn_in", run.config.burn_in},
                           {"chains", run.config.chains},
                           {"seed", run.config.seed},
                           {"target_acceptance", run.config.target_acceptance}};

  json summaries = json::object();
  json rhat = json::object();
  for (std::size_t j = 0; j < run.param_names.size(); ++j) {
    const ParamSummary& s = run.summaries[j];
    summaries[s.name] = {{"mean", s.mean},
                         {"sd", s.sd},
                         {"hpdi", {s.hpdi_lo, s.hpdi_hi}}};
    rhat[run.param_names[j]] = run.rhat[j];
  }
  doc["summaries"] = summaries;
  doc["rhat"] = rhat;
  doc["acceptance_rates"] = run.acceptance_rates;
  doc["correlations"] = {{"params", run.param_names},
                         {"matrix", run.correlations}};
  doc["n_draws"] = run.total_draws();
  doc["last_event"] = run.last_event;
  doc["tf_bounds_used"] = {run.tf_bounds_used.lo, run.tf_bounds_used.hi};
  return doc.dump(2) + "\n";
}

std::string draws_to_csv(const PosteriorRun& run, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "chain,iter,k,t_f,p,shape\n";
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    const ChainDraws& chain = run.chains[c];
    for (std::size_t r = 0; r < chain.rows; ++r) {
      out += std::to_string(c);
      out += ",";
      out += std::to_string(r);
      for (std::size_t j = 0; j < 4; ++j) {
        out += ",";
        const double v = (j < chain.cols) ? chain.at(r, j) : 1.0;
        out += format_double(v);
      }
      out += "\n";
    }
  }
  return out;
}

PosteriorRun draws_from_csv(const std::filesystem::path& path,
                            const ModelConfig& model) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  model.validate();
  PosteriorRun run;
  run.model = model;
  run.param_names = {"k", "t_f", "p"};
  if (model.family != Family::IP) run.param_names.push_back("shape");
  const std::size_t cols = run.param_names.size();

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "chain,iter,k,t_f,p,shape") {
        throw FormatError("unexpected draws header '" + line + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    std::size_t chain_idx = 0;
    double values[5];  // iter, k, t_f, p, shape
    char trailing;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf,%lf%c", &chain_idx,
                    &values[0], &values[1], &values[2], &values[3], &values[4],
                    &trailing) != 6) {
      throw FormatError("malformed draws row '" + line + "'", line_no);
    }
    if (chain_idx >= run.chains.size()) run.chains.resize(chain_idx + 1);
    ChainDraws& chain = run.chains[chain_idx];
    chain.cols = cols;
    chain.rows += 1;
    for (std::size_t j = 0; j < cols; ++j) chain.data.push_back(values[1 + j]);
  }
  if (!header_seen) throw FormatError("no draws header in '" + path.string() + "'");
  if (run.total_draws() == 0) {
    throw FormatError("no draws in '" + path.string() + "'");
  }
  return run;
}

std::pair<ModelConfig, ModelParams> posterior_point_from_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + err.what());
  }
  try {
    ModelConfig model;
    model.family = family_from_name(doc.at("model").at("family").get<std::string>());
    ModelParams params;
    const json& summaries = doc.at("summaries");
    params.k = summaries.at("k").at("mean").get<double>();
    params.t_f = summaries.at("t_f").at("mean").get<double>();
    params.p = summaries.at("p").at("mean").get<double>();
    if (summaries.contains("shape")) {
      params.shape = summaries.at("shape").at("mean").get<double>();
      model.shape = params.shape;
    }
    return {model, params};
  } catch (const json::exception& err) {
    throw FormatError("'" + path.string() +
                      "' is missing posterior fields: " + err.what());
  }
}

std::string qq_to_csv(const QQData& data, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "b,model_q,empirical_q\n";
  for (std::size_t i = 0; i < data.b.size(); ++i) {
    append_row(&out, {data.b[i], data.model_q[i], data.empirical_q[i]});
  }
  return out;
}

std::string ks_to_csv(const KSData& data, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "b,u_sorted,lo95,hi95,lo99,hi99\n";
  for (std::size_t i = 0; i < data.b.size(); ++i) {
    const double b = data.b[i];
    append_row(&out, {b, data.u_sorted[i], std::max(0.0, b - data.bound95),
                      std::min(1.0, b + data.bound95),
                      std::max(0.0, b - data.bound99),
                      std::min(1.0, b + data.bound99)});
  }
  return out;
}

std::string acf_to_csv(const AcfData& data, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "lag,r,band95,band99\n";
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    out += std::to_string(i + 1);
    out += ",";
    out += format_double(data.r[i]);
    out += ",";
    out += format_double(data.band95);
    out += ",";
    out += format_double(data.band99);
    out += "\n";
  }
  return out;
}

std::string pairs_to_csv(const std::vector<std::pair<double, double>>& pairs,
                         const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "u,u_next\n";
  for (const auto& [u, u_next] : pairs) append_row(&out, {u, u_next});
  return out;
}

std::string zhist_to_csv(const ZHistData& data, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "bin_lo,bin_hi,count,overlay_density\n";
  for (std::size_t i = 0; i < data.count.size(); ++i) {
    out += format_double(data.bin_lo[i]);
    out += ",";
    out += format_double(data.bin_hi[i]);
    out += ",";
    out += std::to_string(data.count[i]);
    out += ",";
    out += format_double(data.overlay[i]);
    out += "\n";
  }
  return out;
}

std::string envelope_qq_to_csv(const std::vector<EnvelopeReplicate>& reps,
                               const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  std::size_t failed = 0;
  for (const auto& rep : reps) failed += rep.failed ? 1 : 0;
  out += "# failed_replicates=" + std::to_string(failed) + "\n";
  out += "replicate,b,model_q,empirical_q\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].failed) continue;
    const QQData& qq = reps[r].qq;
    for (std::size_t i = 0; i < qq.b.size(); ++i) {
      out += std::to_string(r);
      out += ",";
      out += format_double(qq.b[i]);
      out += ",";
      out += format_double(qq.model_q[i]);
      out += ",";
      out += format_double(qq.empirical_q[i]);
      out += "\n";
    }
  }
  return out;
}

std::string envelope_ks_to_csv(const std::vector<EnvelopeReplicate>& reps,
                               const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  std::size_t failed = 0;
  for (const auto& rep : reps) failed += rep.failed ? 1 : 0;
  out += "# failed_replicates=" + std::to_string(failed) + "\n";
  out += "replicate,b,u_sorted,lo95,hi95,lo99,hi99\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].failed) continue;
    const KSData& ks = reps[r].ks;
    for (std::size_t i = 0; i < ks.b.size(); ++i) {
      const double b = ks.b[i];
      out += std::to_string(r);
      out += ",";
      append_row(&out, {b, ks.u_sorted[i], std::max(0.0, b - ks.bound95),
                        std::min(1.0, b + ks.bound95),
                        std::max(0.0, b - ks.bound99),
                        std::min(1.0, b + ks.bound99)});
    }
  }
  return out;
}

std::string forecast_to_csv(const ForecastSeries& series, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out +=
      "data_end_days,n_events,tf_mean,tf_hpdi_lo,tf_hpdi_hi,p_mean,p_hpdi_lo,"
      "p_hpdi_hi,k_mean,shape_mean,periodicity_mean,rhat_max,skipped\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& w : series.windows) {
    const bool usable = w.usable();
    out += format_double(w.data_end);
    out += ",";
    out += std::to_string(w.n_events);
    const std::vector<double> fields =
        usable ? std::vector<double>{w.t_f.mean, w.t_f.hpdi_lo, w.t_f.hpdi_hi,
                                     w.p.mean, w.p.hpdi_lo, w.p.hpdi_hi,
                                     w.k.mean, w.shape.mean,
                                     w.periodicity_mean, w.rhat_max}
               : std::vector<double>(10, nan);
    for (double v : fields) {
      out += ",";
      out += format_double(v);
    }
    out += ",";
    out += usable ? "0" : "1";
    out += "\n";
  }
  return out;
}

std::string periodicity_to_csv(const PeriodicityTrack& track, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  if (!track.note.empty()) out += "# note=" + track.note + "\n";
  out += "data_end_days,periodicity_mean,hpdi_lo,hpdi_hi,usable\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pt : track.points) {
    append_row(&out, {pt.data_end, pt.usable ? pt.mean : nan,
                      pt.usable ? pt.lo : nan, pt.usable ? pt.hi : nan,
                      pt.usable ? 1.0 : 0.0});
  }
  return out;
}

std::string cutoff_bins_to_csv(const std::vector<CutoffResult>& results,
                               const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out += "cutoff_days,bin_lo,bin_hi,observed,expected\n";
  for (const auto& res : results) {
    for (std::size_t b = 0; b < res.bin_lo.size(); ++b) {
      out += format_double(res.cutoff_days);
      out += ",";
      out += format_double(res.bin_lo[b]);
      out += ",";
      out += format_double(res.bin_hi[b]);
      out += ",";
      out += std::to_string(res.observed[b]);
      out += ",";
      out += format_double(res.expected.empty() ? 0.0 : res.expected[b]);
      out += "\n";
    }
  }
  return out;
}

std::string paired_to_csv(const PairedForecast& paired, const Metadata& meta) {
  std::string out;
  append_meta(&out, meta);
  out +=
      "data_end_days,n_original,n_thinned,tf_mean_original,tf_mean_thinned,"
      "tf_diff,usable\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t w = 0; w < paired.original.windows.size(); ++w) {
    const ForecastWindow& a = paired.original.windows[w];
    const ForecastWindow& b = paired.thinned.windows[w];
    const bool usable = a.usable() && b.usable();
    out += format_double(a.data_end);
    out += ",";
    out += std::to_string(a.n_events);
    out += ",";
    out += std::to_string(b.n_events);
    for (double v : {usable ? a.t_f.mean : nan, usable ? b.t_f.mean : nan,
                     usable ? paired.tf_mean_diff[w] : nan,
                     usable ? 1.0 : 0.0}) {
      out += ",";
      out += format_double(v);
    }
    out += "\n";
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw DataError("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ppffm
