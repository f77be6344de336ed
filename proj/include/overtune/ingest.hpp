#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "overtune/metrics.hpp"

namespace overtune {

enum class Orientation { Minimize, Maximize };

struct MetricSpec {
    std::string name;
    Orientation orientation = Orientation::Minimize;
    std::string scale_note;
};

using MetricTable = std::vector<MetricSpec>;

// Stratification metadata for one HPO run. (study, learner, dataset,
// metric, resampling, seed, fold) identifies a run within a corpus.
struct RunKey {
    std::string study;
    std::string learner;
    std::string dataset;
    std::string metric;
    std::string resampling;
    std::optional<long long> dataset_size;
    std::optional<long long> seed;
    std::optional<long long> fold;
    std::map<std::string, std::string> extra;

    auto identity() const {
        return std::tie(study, learner, dataset, metric, resampling, seed, fold);
    }
    bool operator==(const RunKey& other) const { return identity() == other.identity(); }
    bool operator<(const RunKey& other) const { return identity() < other.identity(); }
};

// Returns the named field as text; empty string for an unset optional.
// Throws std::invalid_argument for unknown field names.
std::string run_key_field(const RunKey& key, const std::string& field);

std::vector<std::string> run_key_field_names();

struct Run {
    RunKey key;
    ScoreTrajectory traj;
};

struct ParseStats {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::size_t runs = 0;
    std::size_t runs_rejected = 0;
    std::vector<std::string> warnings;
};

struct DuplicateRow {
    RunKey key;
    long long iteration = 0;
    std::size_t first_line = 0;
    std::size_t second_line = 0;
};

struct Corpus {
    std::vector<Run> runs;  // sorted by RunKey
    ParseStats stats;
    std::vector<DuplicateRow> duplicates;
};

enum class CorpusFormat { Csv, Jsonl };

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lines of "name,minimize|maximize"; '#' comments and blank lines skipped.
MetricTable parse_metric_table(const std::string& path);

const MetricSpec* find_metric(const MetricTable& table, const std::string& name);

// Parses the canonical evaluation schema into one ScoreTrajectory per run.
// Maximized metrics are negated to lower-is-better; per-fold validation
// lists (semicolon-joined) are mean-aggregated; rows sorted by iteration.
// Non-finite scores drop the row (with a warning) unless at iteration 1,
// which rejects the whole run.
Corpus parse_corpus(const std::string& path, CorpusFormat format,
                    const MetricTable& metrics);

// Eq-2 style fold aggregation; only the mean is supported.
double aggregate_folds(const std::vector<double>& fold_scores);

struct ValidationReport {
    std::size_t run_count = 0;
    std::vector<DuplicateRow> duplicates;
    std::map<std::size_t, std::size_t> length_histogram;   // T -> run count
    std::map<std::string, std::size_t> runs_per_study;
    bool ok() const { return duplicates.empty(); }
};

ValidationReport validate_corpus(const Corpus& corpus);

// Inverse of parse_corpus for the CSV schema: maximized metrics are
// negated back to their declared orientation, values emitted as shortest
// round-trip decimals so parse(serialize(c)) == c bit-exactly.
void serialize_corpus_csv(const Corpus& corpus, const MetricTable& metrics,
                          std::ostream& out);
void serialize_corpus_csv(const Corpus& corpus, const MetricTable& metrics,
                          const std::string& path);

}  // namespace overtune
