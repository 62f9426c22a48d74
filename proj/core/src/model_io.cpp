#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"

namespace glycast {

// fit() dispatch targets, defined in the per-model translation units.
std::unique_ptr<TrainedModel> fit_ridge(const ForecasterSpec&, const SupervisedSet&);
std::unique_ptr<TrainedModel> fit_forest(const ForecasterSpec&, const SupervisedSet&, unsigned);
std::unique_ptr<TrainedModel> fit_svr(const ForecasterSpec&, const SupervisedSet&);

std::unique_ptr<TrainedModel> fit(const ForecasterSpec& spec,
                                  const SupervisedSet& train, unsigned workers) {
    spec.validate();
    if (train.n_rows() == 0) throw EmptySetError("fit: empty training set");
    switch (spec.kind) {
        case ModelKind::persistence:
            return std::make_unique<PersistenceModel>(train.columns, train.step_s,
                                                      train.horizon_steps);
        case ModelKind::ridge:
            return fit_ridge(spec, train);
        case ModelKind::rf:
            return fit_forest(spec, train, workers);
        case ModelKind::svr:
            return fit_svr(spec, train);
        case ModelKind::arima:
            throw std::invalid_argument("fit: arima is fitted from a level series "
                                        "(use fit_arima)");
    }
    throw std::logic_error("fit: unreachable");
}

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json columns_to_json(const std::vector<LagFeature>& cols) {
    json arr = json::array();
    for (const auto& c : cols) {
        arr.push_back({{"variable", std::string(to_string(c.variable))},
                       {"lag", c.lag_steps}});
    }
    return arr;
}

std::vector<LagFeature> columns_from_json(const json& arr) {
    std::vector<LagFeature> cols;
    for (const auto& item : arr) {
        const auto var = parse_variable(item.at("variable").get<std::string>());
        if (!var) {
            throw std::runtime_error("model file: unknown variable '" +
                                     item.at("variable").get<std::string>() + "'");
        }
        cols.push_back({*var, item.at("lag").get<int>()});
    }
    return cols;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, std::size_t cols_hint) {
    Matrix m(rows.size(), rows.empty() ? cols_hint : rows[0].size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

} // namespace

void save_model(const TrainedModel& model, std::ostream& out) {
    json doc;
    doc["format"] = "glycast-model";
    doc["format_version"] = kFormatVersion;
    doc["kind"] = std::string(to_string(model.kind()));
    doc["step_s"] = model.step_s();
    doc["horizon_steps"] = model.horizon_steps();
    doc["columns"] = columns_to_json(model.columns());

    switch (model.kind()) {
        case ModelKind::persistence:
            break;
        case ModelKind::ridge: {
            const auto& m = static_cast<const RidgeModel&>(model);
            doc["lambda"] = m.lambda();
            doc["feature_mean"] = m.feature_mean();
            doc["feature_sd"] = m.feature_sd();
            doc["y_mean"] = m.y_mean();
            doc["weights_std"] = m.weights_std();
            break;
        }
        case ModelKind::rf: {
            const auto& m = static_cast<const ForestModel&>(model);
            json trees = json::array();
            for (const auto& tree : m.trees()) {
                json nodes = json::array();
                for (const auto& nd : tree) {
                    nodes.push_back({nd.feature, nd.threshold, nd.value,
                                     nd.left, nd.right});
                }
                trees.push_back(std::move(nodes));
            }
            doc["trees"] = std::move(trees);
            doc["y_min"] = m.train_target_min();
            doc["y_max"] = m.train_target_max();
            break;
        }
        case ModelKind::svr: {
            const auto& m = static_cast<const SvrModel&>(model);
            doc["gamma"] = m.gamma();
            doc["feature_mean"] = m.feature_mean();
            doc["feature_sd"] = m.feature_sd();
            doc["y_mean"] = m.y_mean();
            doc["y_sd"] = m.y_sd();
            doc["support_vectors"] = matrix_to_json(m.support_vectors_std());
            doc["beta"] = m.beta();
            doc["bias"] = m.bias_std();
            doc["kkt_violation"] = m.final_kkt_violation();
            doc["iterations"] = m.iterations();
            break;
        }
        case ModelKind::arima: {
            const auto& m = static_cast<const ArimaModel&>(model);
            doc["p"] = m.p();
            doc["d"] = m.d();
            doc["q"] = m.q();
            doc["phi"] = m.phi();
            doc["theta"] = m.theta();
            doc["intercept"] = m.intercept();
            doc["sigma2"] = m.sigma2();
            doc["css"] = m.css();
            doc["n_obs"] = m.n_obs();
            break;
        }
    }
    out << doc.dump(2) << '\n';
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    save_model(model, f);
}

std::unique_ptr<TrainedModel> load_model(std::istream& in) {
    json doc = json::parse(in);
    if (doc.value("format", "") != "glycast-model") {
        throw std::runtime_error("not a glycast model file");
    }
    const int version = doc.value("format_version", -1);
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported model format_version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kFormatVersion) + ")");
    }
    const std::string kind = doc.at("kind").get<std::string>();
    auto columns = columns_from_json(doc.at("columns"));
    const auto step_s = doc.at("step_s").get<std::int64_t>();
    const int horizon = doc.at("horizon_steps").get<int>();

    if (kind == "persistence") {
        return std::make_unique<PersistenceModel>(std::move(columns), step_s, horizon);
    }
    if (kind == "ridge") {
        return std::make_unique<RidgeModel>(
            std::move(columns), step_s, horizon, doc.at("lambda").get<double>(),
            doc.at("feature_mean").get<std::vector<double>>(),
            doc.at("feature_sd").get<std::vector<double>>(),
            doc.at("y_mean").get<double>(),
            doc.at("weights_std").get<std::vector<double>>());
    }
    if (kind == "rf") {
        std::vector<std::vector<ForestModel::Node>> trees;
        for (const auto& tj : doc.at("trees")) {
            std::vector<ForestModel::Node> tree;
            for (const auto& nj : tj) {
                tree.push_back({nj[0].get<int>(), nj[1].get<double>(),
                                nj[2].get<double>(), nj[3].get<int>(),
                                nj[4].get<int>()});
            }
            trees.push_back(std::move(tree));
        }
        return std::make_unique<ForestModel>(std::move(columns), step_s, horizon,
                                             std::move(trees),
                                             doc.at("y_min").get<double>(),
                                             doc.at("y_max").get<double>());
    }
    if (kind == "svr") {
        const std::size_t p = columns.size();
        return std::make_unique<SvrModel>(
            std::move(columns), step_s, horizon, doc.at("gamma").get<double>(),
            doc.at("feature_mean").get<std::vector<double>>(),
            doc.at("feature_sd").get<std::vector<double>>(),
            doc.at("y_mean").get<double>(), doc.at("y_sd").get<double>(),
            matrix_from_json(doc.at("support_vectors"), p),
            doc.at("beta").get<std::vector<double>>(),
            doc.at("bias").get<double>(),
            doc.at("kkt_violation").get<double>(),
            doc.at("iterations").get<long>());
    }
    if (kind == "arima") {
        return std::make_unique<ArimaModel>(
            step_s, doc.at("p").get<int>(), doc.at("d").get<int>(),
            doc.at("q").get<int>(), doc.at("phi").get<std::vector<double>>(),
            doc.at("theta").get<std::vector<double>>(),
            doc.at("intercept").get<double>(), doc.at("sigma2").get<double>(),
            doc.at("css").get<double>(), doc.at("n_obs").get<std::size_t>());
    }
    throw std::runtime_error("unknown model kind '" + kind + "'");
}

std::unique_ptr<TrainedModel> load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return load_model(f);
}

} // namespace glycast
