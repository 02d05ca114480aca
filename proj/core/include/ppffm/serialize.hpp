#ifndef PPFFM_SERIALIZE_HPP_
#define PPFFM_SERIALIZE_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppffm/forecast.hpp"
#include "ppffm/gof.hpp"
#include "ppffm/inference.hpp"

namespace ppffm {

// Key=value lines every output embeds (config echo, seed, version), written
// as '#'-prefixed header lines in CSV and as a "meta" object in JSON. Keys
// are emitted in sorted order so byte-identical reruns stay byte-identical.
using Metadata = std::map<std::string, std::string>;

// Shortest-width %.17g rendering; round-trips doubles exactly.
std::string format_double(double v);

std::string posterior_to_json(const PosteriorRun& run, const Metadata& meta);
std::string draws_to_csv(const PosteriorRun& run, const Metadata& meta);

// Reads a draws CSV back into a chains-only PosteriorRun (draws and
// param_names; no summaries or diagnostics), enough for envelope replay.
// Throws FormatError on malformed rows, DataError on a missing file.
PosteriorRun draws_from_csv(const std::filesystem::path& path,
                            const ModelConfig& model);

// Reads the model family and posterior-mean point estimate out of a
// posterior JSON file.
std::pair<ModelConfig, ModelParams> posterior_point_from_json(
    const std::filesystem::path& path);

std::string qq_to_csv(const QQData& data, const Metadata& meta);
std::string ks_to_csv(const KSData& data, const Metadata& meta);
std::string acf_to_csv(const AcfData& data, const Metadata& meta);
std::string pairs_to_csv(const std::vector<std::pair<double, double>>& pairs,
                         const Metadata& meta);
std::string zhist_to_csv(const ZHistData& data, const Metadata& meta);
std::string envelope_qq_to_csv(const std::vector<EnvelopeReplicate>& reps,
                               const Metadata& meta);
std::string envelope_ks_to_csv(const std::vector<EnvelopeReplicate>& reps,
                               const Metadata& meta);

std::string forecast_to_csv(const ForecastSeries& series, const Metadata& meta);
std::string periodicity_to_csv(const PeriodicityTrack& track, const Metadata& meta);
std::string cutoff_bins_to_csv(const std::vector<CutoffResult>& results,
                               const Metadata& meta);
std::string paired_to_csv(const PairedForecast& paired, const Metadata& meta);

// Writes via a temporary file in the destination directory plus rename, so
// readers never observe a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace ppffm

#endif  // PPFFM_SERIALIZE_HPP_
