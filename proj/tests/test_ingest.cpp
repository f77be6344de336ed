#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>

#include "overtune/ingest.hpp"
#include "overtune/rng.hpp"
#include "overtune/table.hpp"
#include "overtune/text.hpp"

using namespace overtune;

namespace {

const char* kHeader =
    "study,learner,dataset,metric,resampling,dataset_size,seed,fold,iteration,val,test\n";

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

MetricTable acc_and_loss() {
    return {{"accuracy", Orientation::Maximize, ""},
            {"logloss", Orientation::Minimize, ""}};
}

}  // namespace

TEST_CASE("metric table parsing") {
    auto path = write_temp("ot_metric_table.csv",
                           "# orientation table\naccuracy,maximize\nlogloss,minimize\n");
    auto table = parse_metric_table(path);
    REQUIRE(table.size() == 2);
    CHECK(table[0].orientation == Orientation::Maximize);
    CHECK(table[1].orientation == Orientation::Minimize);
    CHECK(find_metric(table, "accuracy") != nullptr);
    CHECK(find_metric(table, "mse") == nullptr);

    auto bad = write_temp("ot_metric_bad.csv", "accuracy,upward\n");
    CHECK_THROWS_AS(parse_metric_table(bad), ParseError);
}

TEST_CASE("maximized metrics are negated at ingest") {
    std::string csv = kHeader;
    csv += "s,l,d,accuracy,holdout,,1,,1,0.7,0.65\n";
    csv += "s,l,d,accuracy,holdout,,1,,2,0.8,0.75\n";
    auto path = write_temp("ot_neg.csv", csv);
    auto corpus = parse_corpus(path, CorpusFormat::Csv, acc_and_loss());
    REQUIRE(corpus.runs.size() == 1);
    CHECK(corpus.runs[0].traj.val == std::vector<double>{-0.7, -0.8});
    CHECK(corpus.runs[0].traj.test == std::vector<double>{-0.65, -0.75});
}

TEST_CASE("negation idempotence against a pre-negated minimize corpus") {
    std::string max_csv = kHeader;
    max_csv += "s,l,d,accuracy,holdout,,1,,1,0.7,0.65\n";
    max_csv += "s,l,d,accuracy,holdout,,1,,2,0.8,0.75\n";
    std::string min_csv = kHeader;
    min_csv += "s,l,d,logloss,holdout,,1,,1,-0.7,-0.65\n";
    min_csv += "s,l,d,logloss,holdout,,1,,2,-0.8,-0.75\n";
    auto a = parse_corpus(write_temp("ot_max.csv", max_csv), CorpusFormat::Csv,
                          acc_and_loss());
    auto b = parse_corpus(write_temp("ot_min.csv", min_csv), CorpusFormat::Csv,
                          acc_and_loss());
    CHECK(a.runs[0].traj.val == b.runs[0].traj.val);
    CHECK(a.runs[0].traj.test == b.runs[0].traj.test);
}

TEST_CASE("per-fold validation lists are mean-aggregated") {
    std::string csv = kHeader;
    csv += "s,l,d,logloss,cv,,1,,1,0.2;0.3;0.4,0.5\n";
    auto corpus = parse_corpus(write_temp("ot_folds.csv", csv), CorpusFormat::Csv,
                               acc_and_loss());
    REQUIRE(corpus.runs.size() == 1);
    CHECK(corpus.runs[0].traj.val[0] == doctest::Approx(0.3));
}

TEST_CASE("aggregate_folds") {
    CHECK(aggregate_folds({0.2, 0.3, 0.4}) == doctest::Approx(0.3));
    CHECK(aggregate_folds({0.123}) == 0.123);
    CHECK_THROWS_AS(aggregate_folds({}), std::invalid_argument);

    Rng rng(11);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> xs;
        for (int i = 0; i < 5; ++i) xs.push_back(rng.uniform(-10.0, 10.0));
        double sum = 0.0;
        for (double x : xs) sum += x;  // independent re-summation
        CHECK(std::abs(aggregate_folds(xs) - sum / 5.0) <= 1e-12);
    }
}

TEST_CASE("non-finite rows are dropped, iteration-1 rejects the run") {
    std::string csv = kHeader;
    // run A: nan mid-run -> row dropped
    csv += "s,l,a,logloss,cv,,1,,1,0.5,0.5\n";
    csv += "s,l,a,logloss,cv,,1,,2,nan,0.4\n";
    csv += "s,l,a,logloss,cv,,1,,3,0.3,0.3\n";
    // run B: clean
    csv += "s,l,b,logloss,cv,,1,,1,0.5,0.5\n";
    // run C: nan at iteration 1 -> rejected
    csv += "s,l,c,logloss,cv,,1,,1,nan,0.5\n";
    csv += "s,l,c,logloss,cv,,1,,2,0.4,0.4\n";
    auto corpus = parse_corpus(write_temp("ot_nan.csv", csv), CorpusFormat::Csv,
                               acc_and_loss());
    CHECK(corpus.runs.size() == 2);
    CHECK(corpus.stats.runs_rejected == 1);
    CHECK(corpus.stats.rows_read == 6);
    CHECK(corpus.stats.rows_kept + corpus.stats.rows_dropped == corpus.stats.rows_read);
    CHECK(corpus.stats.rows_dropped == 3);  // 1 mid-run + 2 from the rejected run
    CHECK(corpus.runs[0].traj.length() == 2);  // run A compacted
}

TEST_CASE("unknown metric and non-contiguous iterations are hard errors") {
    std::string csv = kHeader;
    csv += "s,l,d,mse,cv,,1,,1,0.5,0.5\n";
    CHECK_THROWS_AS(parse_corpus(write_temp("ot_badmetric.csv", csv), CorpusFormat::Csv,
                                 acc_and_loss()),
                    ParseError);

    std::string gap = kHeader;
    gap += "s,l,d,logloss,cv,,1,,1,0.5,0.5\n";
    gap += "s,l,d,logloss,cv,,1,,3,0.4,0.4\n";
    CHECK_THROWS_AS(parse_corpus(write_temp("ot_gap.csv", gap), CorpusFormat::Csv,
                                 acc_and_loss()),
                    ParseError);
}

TEST_CASE("validate_corpus reports duplicates and histograms") {
    SUBCASE("duplicate key fails validation") {
        std::string csv = kHeader;
        csv += "s,l,d,logloss,cv,,7,,1,0.5,0.5\n";
        csv += "s,l,d,logloss,cv,,7,,1,0.4,0.4\n";
        auto corpus = parse_corpus(write_temp("ot_dup.csv", csv), CorpusFormat::Csv,
                                   acc_and_loss());
        auto report = validate_corpus(corpus);
        CHECK_FALSE(report.ok());
        REQUIRE(report.duplicates.size() == 1);
        CHECK(report.duplicates[0].key.seed == 7);
        CHECK(report.duplicates[0].first_line == 2);
        CHECK(report.duplicates[0].second_line == 3);
    }
    SUBCASE("clean corpus with length histogram") {
        std::string csv = kHeader;
        for (int run = 0; run < 10; ++run) {
            const int len = run == 0 ? 3 : (run == 1 ? 2 : 1);
            for (int t = 1; t <= len; ++t) {
                csv += "s,l,d" + std::to_string(run) + ",logloss,cv,,1,," +
                       std::to_string(t) + ",0.5,0.5\n";
            }
        }
        auto corpus = parse_corpus(write_temp("ot_clean.csv", csv), CorpusFormat::Csv,
                                   acc_and_loss());
        auto report = validate_corpus(corpus);
        CHECK(report.ok());
        CHECK(report.run_count == 10);
        CHECK(report.length_histogram[1] == 8);
        CHECK(report.length_histogram[2] == 1);
        CHECK(report.length_histogram[3] == 1);
        CHECK(report.runs_per_study["s"] == 10);
    }
}

TEST_CASE("jsonl parsing with array val and orientation") {
    std::string jsonl =
        R"({"study":"s","learner":"l","dataset":"d","metric":"accuracy","resampling":"cv","seed":1,"iteration":1,"val":[0.6,0.8],"test":0.65})"
        "\n"
        R"({"study":"s","learner":"l","dataset":"d","metric":"accuracy","resampling":"cv","seed":1,"iteration":2,"val":0.8,"test":0.75})"
        "\n";
    auto corpus = parse_corpus(write_temp("ot_rows.jsonl", jsonl), CorpusFormat::Jsonl,
                               acc_and_loss());
    REQUIRE(corpus.runs.size() == 1);
    CHECK(corpus.runs[0].traj.val == std::vector<double>{-0.7, -0.8});
    CHECK(corpus.runs[0].traj.test == std::vector<double>{-0.65, -0.75});
}

TEST_CASE("jsonl keeps unknown string fields as extra metadata") {
    std::string jsonl =
        R"({"study":"s","learner":"l","dataset":"d","metric":"logloss","resampling":"cv","seed":1,"iteration":1,"val":0.5,"test":0.5,"optimizer":"rs"})"
        "\n";
    auto corpus = parse_corpus(write_temp("ot_extra.jsonl", jsonl), CorpusFormat::Jsonl,
                               acc_and_loss());
    REQUIRE(corpus.runs.size() == 1);
    CHECK(run_key_field(corpus.runs[0].key, "optimizer") == "rs");
}

TEST_CASE("serialize/parse round trip is bit-exact") {
    Rng rng(55);
    std::string csv = kHeader;
    for (int run = 0; run < 5; ++run) {
        for (int t = 1; t <= 8; ++t) {
            csv += "s,l,d" + std::to_string(run) + ",accuracy,holdout,100," +
                   std::to_string(run) + ",," + std::to_string(t) + "," +
                   fmt_double(rng.uniform(0.0, 1.0)) + "," +
                   fmt_double(rng.uniform(0.0, 1.0)) + "\n";
        }
    }
    auto table = acc_and_loss();
    auto corpus = parse_corpus(write_temp("ot_rt1.csv", csv), CorpusFormat::Csv, table);

    std::ostringstream serialized;
    serialize_corpus_csv(corpus, table, serialized);
    auto reparsed = parse_corpus(write_temp("ot_rt2.csv", serialized.str()),
                                 CorpusFormat::Csv, table);
    REQUIRE(reparsed.runs.size() == corpus.runs.size());
    for (std::size_t i = 0; i < corpus.runs.size(); ++i) {
        CHECK(reparsed.runs[i].key == corpus.runs[i].key);
        CHECK(reparsed.runs[i].traj.val == corpus.runs[i].traj.val);
        CHECK(reparsed.runs[i].traj.test == corpus.runs[i].traj.test);
    }

    // serializing the reparsed corpus reproduces the same bytes
    std::ostringstream again;
    serialize_corpus_csv(reparsed, table, again);
    CHECK(again.str() == serialized.str());
}

TEST_CASE("table emits identical numeric content as CSV and JSON") {
    Table table({"name", "x", "n", "maybe"});
    Rng rng(77);
    std::vector<double> xs;
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(-1e6, 1e6) * std::pow(10.0, -(i % 9));
        xs.push_back(x);
        table.add_row({std::string("row") + std::to_string(i), x,
                       static_cast<long long>(i),
                       i % 3 ? Table::Cell{x / 3.0} : Table::Cell{std::monostate{}}});
    }
    std::ostringstream csv, json;
    table.write_csv(csv);
    table.write_json(json);

    auto parsed = nlohmann::json::parse(json.str());
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);  // header
    std::size_t i = 0;
    while (std::getline(lines, line)) {
        auto cells = split(line, ',');
        REQUIRE(cells.size() == 4);
        CHECK(*parse_double(cells[1]) == xs[i]);
        CHECK(parsed[i]["x"].get<double>() == xs[i]);
        if (i % 3) {
            CHECK(*parse_double(cells[3]) == parsed[i]["maybe"].get<double>());
        } else {
            CHECK(cells[3].empty());
            CHECK(parsed[i]["maybe"].is_null());
        }
        ++i;
    }
    CHECK(i == 20);
}
