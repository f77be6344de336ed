#include "overtune/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "overtune/text.hpp"

namespace overtune {

namespace {

const char* kCsvHeader =
    "study,learner,dataset,metric,resampling,dataset_size,seed,fold,iteration,val,test";

std::string describe_key(const RunKey& key) {
    std::ostringstream os;
    os << "study=" << key.study << " learner=" << key.learner
       << " dataset=" << key.dataset << " metric=" << key.metric
       << " resampling=" << key.resampling;
    if (key.seed) os << " seed=" << *key.seed;
    if (key.fold) os << " fold=" << *key.fold;
    return os.str();
}

struct RowRec {
    long long iteration = 0;
    double val = 0.0;
    double test = 0.0;
    bool finite = false;
    std::size_t line = 0;
};

std::string_view trim_cr(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    return s;
}

// val cell: scalar, or semicolon-joined per-fold list aggregated by mean.
std::optional<double> parse_val_cell(std::string_view cell) {
    if (cell.find(';') == std::string_view::npos) {
        return parse_double(cell);
    }
    std::vector<double> folds;
    for (auto part : split(cell, ';')) {
        auto v = parse_double(part);
        if (!v) return std::nullopt;
        folds.push_back(*v);
    }
    if (folds.empty()) return std::nullopt;
    return aggregate_folds(folds);
}

}  // namespace

double aggregate_folds(const std::vector<double>& fold_scores) {
    if (fold_scores.empty()) {
        throw std::invalid_argument("empty fold list");
    }
    double sum = 0.0;
    for (double s : fold_scores) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument("non-finite fold score");
        }
        sum += s;
    }
    return sum / static_cast<double>(fold_scores.size());
}

MetricTable parse_metric_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open metric table: " + path);
    }
    MetricTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim_cr(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto parts = split(sv, ',');
        if (parts.size() < 2) {
            throw ParseError("metric table line " + std::to_string(lineno) +
                             ": expected 'name,minimize|maximize'");
        }
        MetricSpec spec;
        spec.name = std::string(parts[0]);
        if (parts[1] == "minimize") {
            spec.orientation = Orientation::Minimize;
        } else if (parts[1] == "maximize") {
            spec.orientation = Orientation::Maximize;
        } else {
            throw ParseError("metric table line " + std::to_string(lineno) +
                             ": unknown orientation '" + std::string(parts[1]) + "'");
        }
        if (parts.size() > 2) spec.scale_note = std::string(parts[2]);
        table.push_back(std::move(spec));
    }
    return table;
}

const MetricSpec* find_metric(const MetricTable& table, const std::string& name) {
    for (const auto& spec : table) {
        if (spec.name == name) return &spec;
    }
    return nullptr;
}

std::string run_key_field(const RunKey& key, const std::string& field) {
    auto opt_str = [](const std::optional<long long>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    if (field == "study") return key.study;
    if (field == "learner") return key.learner;
    if (field == "dataset") return key.dataset;
    if (field == "metric") return key.metric;
    if (field == "resampling") return key.resampling;
    if (field == "dataset_size") return opt_str(key.dataset_size);
    if (field == "seed") return opt_str(key.seed);
    if (field == "fold") return opt_str(key.fold);
    auto it = key.extra.find(field);
    if (it != key.extra.end()) return it->second;
    throw std::invalid_argument("unknown run key field: " + field);
}

std::vector<std::string> run_key_field_names() {
    return {"study",        "learner", "dataset", "metric",
            "resampling",   "dataset_size", "seed", "fold"};
}

namespace {

// Shared back end once rows are extracted from either format.
Corpus assemble(std::map<RunKey, std::vector<RowRec>>&& rows_by_key, ParseStats stats) {
    Corpus corpus;
    for (auto& [key, rows] : rows_by_key) {
        std::stable_sort(rows.begin(), rows.end(), [](const RowRec& a, const RowRec& b) {
            return a.iteration < b.iteration;
        });

        // Duplicate (key, iteration) pairs surface through validate_corpus;
        // the later row is dropped here so a trajectory can still be built.
        std::vector<RowRec> unique_rows;
        for (const auto& row : rows) {
            if (!unique_rows.empty() && unique_rows.back().iteration == row.iteration) {
                corpus.duplicates.push_back({key, row.iteration,
                                             unique_rows.back().line, row.line});
                stats.rows_dropped += 1;
                continue;
            }
            unique_rows.push_back(row);
        }

        for (std::size_t i = 0; i < unique_rows.size(); ++i) {
            if (unique_rows[i].iteration != static_cast<long long>(i) + 1) {
                throw ParseError("non-contiguous iterations in run: " + describe_key(key));
            }
        }

        bool rejected = false;
        ScoreTrajectory traj;
        for (const auto& row : unique_rows) {
            if (!row.finite) {
                if (row.iteration == 1) {
                    stats.warnings.push_back("run rejected, non-finite score at iteration 1: " +
                                             describe_key(key));
                    rejected = true;
                    break;
                }
                stats.warnings.push_back("dropped non-finite row at iteration " +
                                         std::to_string(row.iteration) + ": " +
                                         describe_key(key));
                stats.rows_dropped += 1;
                continue;
            }
            traj.val.push_back(row.val);
            traj.test.push_back(row.test);
            stats.rows_kept += 1;
        }
        if (rejected) {
            stats.runs_rejected += 1;
            stats.rows_dropped += unique_rows.size();
            continue;
        }
        if (traj.val.empty()) continue;
        corpus.runs.push_back({key, std::move(traj)});
    }
    stats.runs = corpus.runs.size();
    corpus.stats = std::move(stats);
    return corpus;
}

Corpus parse_csv(std::istream& in, const MetricTable& metrics) {
    std::string line;
    if (!std::getline(in, line) || trim_cr(line) != kCsvHeader) {
        throw ParseError(std::string("bad or missing CSV header, expected: ") + kCsvHeader);
    }
    ParseStats stats;
    std::map<RunKey, std::vector<RowRec>> rows_by_key;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim_cr(line);
        if (sv.empty()) continue;
        stats.rows_read += 1;
        auto cells = split(sv, ',');
        if (cells.size() != 11) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 11 fields, got " +
                             std::to_string(cells.size()));
        }
        RunKey key;
        key.study = std::string(cells[0]);
        key.learner = std::string(cells[1]);
        key.dataset = std::string(cells[2]);
        key.metric = std::string(cells[3]);
        key.resampling = std::string(cells[4]);
        if (!cells[5].empty()) key.dataset_size = parse_int(cells[5]);
        if (!cells[6].empty()) key.seed = parse_int(cells[6]);
        if (!cells[7].empty()) key.fold = parse_int(cells[7]);

        const MetricSpec* spec = find_metric(metrics, key.metric);
        if (!spec) {
            throw ParseError("line " + std::to_string(lineno) + ": unknown metric '" +
                             key.metric + "'");
        }
        auto iteration = parse_int(cells[8]);
        if (!iteration || *iteration < 1) {
            throw ParseError("line " + std::to_string(lineno) + ": bad iteration");
        }
        RowRec row;
        row.iteration = *iteration;
        row.line = lineno;
        auto val = parse_val_cell(cells[9]);
        auto test = parse_double(cells[10]);
        if (val && test && std::isfinite(*val) && std::isfinite(*test)) {
            const double sign = spec->orientation == Orientation::Maximize ? -1.0 : 1.0;
            row.val = sign * *val;
            row.test = sign * *test;
            row.finite = true;
        }
        rows_by_key[key].push_back(row);
    }
    return assemble(std::move(rows_by_key), std::move(stats));
}

Corpus parse_jsonl(std::istream& in, const MetricTable& metrics) {
    ParseStats stats;
    std::map<RunKey, std::vector<RowRec>> rows_by_key;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim_cr(line);
        if (sv.empty()) continue;
        stats.rows_read += 1;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(sv);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        RunKey key;
        key.study = obj.value("study", "");
        key.learner = obj.value("learner", "");
        key.dataset = obj.value("dataset", "");
        key.metric = obj.value("metric", "");
        key.resampling = obj.value("resampling", "");
        if (obj.contains("dataset_size") && obj["dataset_size"].is_number_integer())
            key.dataset_size = obj["dataset_size"].get<long long>();
        if (obj.contains("seed") && obj["seed"].is_number_integer())
            key.seed = obj["seed"].get<long long>();
        if (obj.contains("fold") && obj["fold"].is_number_integer())
            key.fold = obj["fold"].get<long long>();
        // unknown string-valued fields become extra stratification metadata
        for (const auto& [name, value] : obj.items()) {
            static const std::vector<std::string> known = {
                "study", "learner", "dataset", "metric", "resampling",
                "dataset_size", "seed", "fold", "iteration", "val", "test"};
            if (value.is_string() &&
                std::find(known.begin(), known.end(), name) == known.end()) {
                key.extra[name] = value.get<std::string>();
            }
        }

        const MetricSpec* spec = find_metric(metrics, key.metric);
        if (!spec) {
            throw ParseError("line " + std::to_string(lineno) + ": unknown metric '" +
                             key.metric + "'");
        }
        if (!obj.contains("iteration") || !obj["iteration"].is_number_integer() ||
            obj["iteration"].get<long long>() < 1) {
            throw ParseError("line " + std::to_string(lineno) + ": bad iteration");
        }
        RowRec row;
        row.iteration = obj["iteration"].get<long long>();
        row.line = lineno;

        std::optional<double> val;
        if (obj.contains("val")) {
            if (obj["val"].is_array()) {
                std::vector<double> folds;
                bool ok = true;
                for (const auto& v : obj["val"]) {
                    if (!v.is_number()) { ok = false; break; }
                    folds.push_back(v.get<double>());
                }
                if (ok && !folds.empty()) val = aggregate_folds(folds);
            } else if (obj["val"].is_number()) {
                val = obj["val"].get<double>();
            }
        }
        std::optional<double> test;
        if (obj.contains("test") && obj["test"].is_number()) {
            test = obj["test"].get<double>();
        }
        if (val && test && std::isfinite(*val) && std::isfinite(*test)) {
            const double sign = spec->orientation == Orientation::Maximize ? -1.0 : 1.0;
            row.val = sign * *val;
            row.test = sign * *test;
            row.finite = true;
        }
        rows_by_key[key].push_back(row);
    }
    return assemble(std::move(rows_by_key), std::move(stats));
}

}  // namespace

Corpus parse_corpus(const std::string& path, CorpusFormat format,
                    const MetricTable& metrics) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open input: " + path);
    }
    return format == CorpusFormat::Csv ? parse_csv(in, metrics) : parse_jsonl(in, metrics);
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    report.run_count = corpus.runs.size();
    report.duplicates = corpus.duplicates;
    for (const auto& run : corpus.runs) {
        report.length_histogram[run.traj.length()] += 1;
        report.runs_per_study[run.key.study] += 1;
    }
    return report;
}

void serialize_corpus_csv(const Corpus& corpus, const MetricTable& metrics,
                          std::ostream& out) {
    out << kCsvHeader << "\n";
    for (const auto& run : corpus.runs) {
        const MetricSpec* spec = find_metric(metrics, run.key.metric);
        if (!spec) {
            throw ParseError("serialize: unknown metric '" + run.key.metric + "'");
        }
        const double sign = spec->orientation == Orientation::Maximize ? -1.0 : 1.0;
        auto opt_str = [](const std::optional<long long>& v) {
            return v ? std::to_string(*v) : std::string();
        };
        for (std::size_t t = 0; t < run.traj.length(); ++t) {
            out << run.key.study << ',' << run.key.learner << ',' << run.key.dataset << ','
                << run.key.metric << ',' << run.key.resampling << ','
                << opt_str(run.key.dataset_size) << ',' << opt_str(run.key.seed) << ','
                << opt_str(run.key.fold) << ',' << (t + 1) << ','
                << fmt_double(sign * run.traj.val[t]) << ','
                << fmt_double(sign * run.traj.test[t]) << "\n";
        }
    }
}

void serialize_corpus_csv(const Corpus& corpus, const MetricTable& metrics,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open output: " + path);
    }
    serialize_corpus_csv(corpus, metrics, out);
}

}  // namespace overtune
