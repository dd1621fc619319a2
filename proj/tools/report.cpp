#include "report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "biasaudit/errors.hpp"

namespace biasaudit::cli {

using nlohmann::json;

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fixed(double v, int digits)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

json matrix_json(Eigen::MatrixXd const& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(json const& rows)
{
    auto const n = static_cast<Eigen::Index>(rows.size());
    auto const m = n == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            out(i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
        }
    }
    return out;
}

json vector_json(Eigen::VectorXd const& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(json const& a)
{
    auto values = a.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

std::string summary_text(std::vector<DatasetSummary> const& summary, std::vector<RejectedRow> const& rejected)
{
    std::string out = "dataset,N,age_mean,age_sd,male_pct,n_diseased\n";
    std::size_t total = 0;
    for (auto const& s : summary) {
        out += s.dataset + "," + std::to_string(s.n) + "," + fixed(s.age_mean, 1) + "," + fixed(s.age_sd, 1) + ","
            + fixed(s.male_percent, 1) + "," + std::to_string(s.n_diseased) + "\n";
        total += s.n;
    }
    out += "valid rows: " + std::to_string(total) + "\n";
    out += "rejected rows: " + std::to_string(rejected.size()) + "\n";
    for (auto const& r : rejected) {
        out += "  line " + std::to_string(r.line) + (r.subject_id.empty() ? "" : " (" + r.subject_id + ")") + ": "
            + r.reason + "\n";
    }
    return out;
}

std::string scores_csv(ScoreRun const& run)
{
    std::string out = "dataset,target,n,L_ca,L_co,delta,delta_per_sample,converged\n";
    for (auto const& r : run.records) {
        bool const converged = r.diagnostics.causal_converged && r.diagnostics.confounded_converged;
        out += r.dataset + "," + r.target + "," + std::to_string(r.n) + "," + num(r.L_ca) + "," + num(r.L_co) + ","
            + num(r.delta) + "," + num(r.delta_per_sample()) + "," + (converged ? "true" : "false") + "\n";
    }
    return out;
}

std::string aggregate_csv(AggregateResult const& agg)
{
    std::string out = "dataset,mean_delta,sd_delta,n_targets\n";
    for (auto const& a : agg.datasets) {
        out += a.dataset + "," + num(a.mean_delta) + "," + num(a.sd_delta) + "," + std::to_string(a.n_targets) + "\n";
    }
    return out;
}

std::string scores_json(ScoreRun const& run, AggregateResult const& agg, RunConfig const& config)
{
    json doc;
    doc["config_fingerprint"] = config.fingerprint();
    doc["config"] = config.canonical();
    doc["units"] = "nats";
    json records = json::array();
    for (auto const& r : run.records) {
        auto const& d = r.diagnostics;
        records.push_back({
            {"dataset", r.dataset},
            {"target", r.target},
            {"n", r.n},
            {"L_ca", r.L_ca},
            {"L_co", r.L_co},
            {"delta", r.delta},
            {"delta_per_sample", r.delta_per_sample()},
            {"diagnostics",
                {
                    {"causal_converged", d.causal_converged},
                    {"confounded_converged", d.confounded_converged},
                    {"causal_iterations", d.causal_iterations},
                    {"confounded_iterations", d.confounded_iterations},
                    {"causal_elbo_se", d.causal_se},
                    {"confounded_elbo_se", d.confounded_se},
                    {"causal_method", d.causal_method},
                    {"causal_family", d.causal_family},
                    {"confounded_family", d.confounded_family},
                    {"confounded_latent_dim", d.confounded_latent_dim},
                    {"seed", d.seed},
                    {"score_fingerprint", d.config_fingerprint},
                }},
        });
    }
    doc["records"] = std::move(records);
    json failures = json::array();
    for (auto const& f : run.failures) {
        failures.push_back({{"dataset", f.dataset}, {"target", f.target}, {"error", f.message}});
    }
    doc["failures"] = std::move(failures);
    json aggregate = json::array();
    for (auto const& a : agg.datasets) {
        aggregate.push_back({{"dataset", a.dataset}, {"mean_delta", a.mean_delta}, {"sd_delta", a.sd_delta},
            {"mean_delta_per_sample", a.mean_delta_per_sample}, {"n_targets", a.n_targets}, {"n_failed", a.n_failed}});
    }
    doc["aggregate"] = std::move(aggregate);
    doc["warnings"] = agg.warnings;
    return doc.dump(2) + "\n";
}

std::string curve_csv(NameThatDatasetResult const& result)
{
    std::string out = "feature_set,fraction,mean_acc,sd_acc,repetitions\n";
    for (auto const& fs : result.feature_sets) {
        for (auto const& p : fs.curve.points) {
            out += fs.curve.feature_set + "," + num(p.train_fraction) + "," + num(p.mean_accuracy) + ","
                + num(p.sd_accuracy) + "," + std::to_string(p.repetitions) + "\n";
        }
    }
    return out;
}

std::string confusion_csv(ConfusionMatrix const& cm)
{
    std::string out = "true_dataset,predicted_dataset,count\n";
    auto const& classes = cm.classes();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = 0; j < classes.size(); ++j) {
            out += classes[i] + "," + classes[j] + ","
                + std::to_string(cm.at(static_cast<int>(i), static_cast<int>(j))) + "\n";
        }
    }
    return out;
}

std::string classify_json(NameThatDatasetResult const& result, RunConfig const& config)
{
    json doc;
    doc["config_fingerprint"] = config.fingerprint();
    doc["config"] = config.canonical();
    json sets = json::array();
    for (auto const& fs : result.feature_sets) {
        json points = json::array();
        for (auto const& p : fs.curve.points) {
            points.push_back({{"fraction", p.train_fraction}, {"mean_acc", p.mean_accuracy},
                {"sd_acc", p.sd_accuracy}, {"repetitions", p.repetitions}});
        }
        sets.push_back({{"feature_set", fs.curve.feature_set}, {"curve", points},
            {"confusion_accuracy", fs.confusion.accuracy()}, {"confusion_total", fs.confusion.total()}});
    }
    doc["feature_sets"] = std::move(sets);
    doc["warnings"] = result.warnings;
    return doc.dump(2) + "\n";
}

std::string truth_json(GroundTruth const& truth)
{
    json doc;
    doc["alpha"] = truth.alpha;
    doc["seed"] = truth.seed;
    doc["dataset"] = truth.dataset;
    doc["noise_sd"] = truth.noise_sd;
    doc["weights"] = vector_json(truth.weights);
    doc["loadings"] = matrix_json(truth.loadings);
    doc["target_loadings"] = vector_json(truth.target_loadings);
    doc["cause_columns"] = truth.cause_columns;
    doc["target_column"] = truth.target_column;
    doc["z"] = matrix_json(truth.z);
    doc["noise"] = vector_json(truth.noise);
    return doc.dump(2) + "\n";
}

GroundTruth truth_from_json(std::string const& text)
{
    try {
        auto const doc = json::parse(text);
        GroundTruth t;
        t.alpha = doc.at("alpha").get<double>();
        t.seed = doc.at("seed").get<std::uint64_t>();
        t.dataset = doc.at("dataset").get<std::string>();
        t.noise_sd = doc.at("noise_sd").get<double>();
        t.weights = vector_from(doc.at("weights"));
        t.loadings = matrix_from(doc.at("loadings"));
        t.target_loadings = vector_from(doc.at("target_loadings"));
        t.cause_columns = doc.at("cause_columns").get<std::vector<std::string>>();
        t.target_column = doc.at("target_column").get<std::string>();
        t.z = matrix_from(doc.at("z"));
        t.noise = vector_from(doc.at("noise"));
        return t;
    } catch (json::exception const& e) {
        throw SchemaError(std::string("malformed ground-truth file: ") + e.what());
    }
}

void write_text_file(std::filesystem::path const& path, std::string const& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << content;
}

std::string read_text_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot read " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace biasaudit::cli
