#include "trafficpinn/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "trafficpinn/csv.hpp"

namespace tpinn {

MlpParams xavier_init(const MlpShape& shape, Head head, std::uint64_t seed) {
    MlpParams net = MlpParams::zeros(shape, head);
    std::mt19937_64 rng(seed);
    for (auto& layer : net.layers()) {
        const double fan_in = static_cast<double>(layer.weight.cols());
        const double fan_out = static_cast<double>(layer.weight.rows());
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    return net;
}

MlpParams shift_time_input(const MlpParams& params, double delta_s) {
    MlpParams out = params;
    auto& first = out.layers().front();
    if (first.weight.cols() < 1) throw ConfigError("time shift needs a time input column");
    first.bias += first.weight.col(0) * delta_s;
    return out;
}

namespace {
constexpr const char* kMagic = "trafficpinn-mlp";

double read_number(std::istream& in) {
    std::string token;
    if (!(in >> token)) throw DataError("checkpoint: unexpected end of file");
    return csv::parse_double(token, "checkpoint value");
}
} // namespace

void write_checkpoint(std::ostream& out, const MlpParams& params) {
    out << kMagic << " 1\n";
    out << "head " << (params.head() == Head::sigmoid ? "sigmoid" : "identity") << '\n';
    out << "layers " << params.layers().size() << '\n';
    for (const auto& layer : params.layers()) {
        out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                out << (c ? " " : "") << csv::format(layer.weight(r, c));
            out << '\n';
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << csv::format(layer.bias[r]);
        out << '\n';
    }
}

MlpParams read_checkpoint(std::istream& in) {
    std::string magic, key, head_name;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic || version != 1) throw DataError("checkpoint: bad magic/version");
    if (!(in >> key >> head_name) || key != "head") throw DataError("checkpoint: missing head");
    Head head;
    if (head_name == "sigmoid") head = Head::sigmoid;
    else if (head_name == "identity") head = Head::identity;
    else throw DataError("checkpoint: unknown head '" + head_name + "'");
    std::size_t count = 0;
    if (!(in >> key >> count) || key != "layers" || count == 0) throw DataError("checkpoint: missing layer count");

    std::vector<DenseLayer<double>> layers;
    for (std::size_t l = 0; l < count; ++l) {
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> key >> rows >> cols) || key != "layer" || rows < 1 || cols < 1)
            throw DataError("checkpoint: bad layer header");
        DenseLayer<double> layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = read_number(in);
        for (Eigen::Index r = 0; r < rows; ++r) layer.bias[r] = read_number(in);
        layers.push_back(std::move(layer));
    }
    return MlpParams(std::move(layers), head);
}

} // namespace tpinn
