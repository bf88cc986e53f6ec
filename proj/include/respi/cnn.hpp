#ifndef RESPI_CNN_HPP
#define RESPI_CNN_HPP

#include "respi/dataset.hpp"
#include "respi/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

namespace respi::cnn {

enum class LayerKind : std::uint32_t { Conv = 0, MaxPool = 1, Dense = 2, Softmax = 3 };

/// Architecture element. dropout_p is the drop probability applied to this
/// layer's output during training (inverted dropout, inactive at inference).
struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int depth = 0;       // Conv: number of kernels (output feature maps)
    int kernel_len = 0;  // Conv
    int pool_len = 0;    // MaxPool
    int units = 0;       // Dense
    int classes = 0;     // Softmax
    double dropout_p = 0.0;

    static LayerSpec conv(int depth, int kernel_len, double dropout = 0.0);
    static LayerSpec maxpool(int pool_len, double dropout = 0.0);
    static LayerSpec dense(int units, double dropout = 0.0);
    static LayerSpec softmax(int classes);
};

/// Two convolutional layers and two fully connected layers:
/// Conv(depth, kernel) -> Pool(2) -> Conv(depth, kernel) -> Pool(2) ->
/// Dense(units) -> Softmax(classes), dropout after each hidden block.
/// Dropout defaults to 0.3: at 0.5 the triple application swamps the
/// discriminative signal and training never leaves the uniform predictor.
std::vector<LayerSpec> default_arch(int classes, int depth = 11, int kernel_len = 9,
                                    int dense_units = 64, double dropout = 0.3);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 16;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;  // per-epoch multiplier on the learning rate
    double momentum = 0.9;
    double lambda2 = 1e-4;  // L2 penalty on convolution weights
    double lambda1 = 1e-5;  // L1 penalty on the first dense layer's activations
    std::optional<double> dropout_p;  // overrides every layer's dropout when set
    std::uint64_t seed = 0;
    double val_fraction = 0.2;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> train_accuracy;
    std::vector<double> val_accuracy;
};

/// Network with all weights. Internally activations are kept time-major
/// (length x maps) so convolution inner loops run over contiguous columns;
/// the public free functions below use the conventional maps x length
/// orientation.
template <typename Scalar>
struct CnnModel {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct ConvLayer {
        std::vector<Matrix> kernels;  // kernels[m]: in_maps x kernel_len
        Vector bias;                  // one per output map
        double dropout_p = 0.0;
    };
    struct PoolLayer {
        int len = 1;
        double dropout_p = 0.0;
    };
    struct DenseLayer {
        Matrix weights;  // units x fan_in
        Vector bias;
        bool output = false;  // true: softmax head (no ReLU)
        double dropout_p = 0.0;
    };
    using Layer = std::variant<ConvLayer, PoolLayer, DenseLayer>;

    std::vector<LayerSpec> arch;
    std::vector<Layer> layers;
    int input_len = 0;
    int first_dense = -1;  // layer index carrying the L1 activation penalty
    std::vector<std::string> class_names;

    int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// Validates layer compatibility for a 2 x input_len input (final layer must
/// be Softmax matching class_names) and initializes weights from the seed.
template <typename Scalar>
CnnModel<Scalar> build_model(const std::vector<LayerSpec>& arch, int input_len,
                             std::vector<std::string> class_names, std::uint64_t seed);

/// Valid (no padding) correlation along time plus ReLU, maps x length
/// orientation: out[m][r] = max(0, b[m] + sum_i sum_l k[m](i,l) in[i][r+l]).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> conv1d_forward(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& input,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& kernels,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& biases);

/// Disjoint max pooling over blocks of H along time (maps x length
/// orientation); the remainder shorter than H is dropped.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> maxpool1d(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& input, int pool_len);

/// Max-shifted softmax; overflow-safe for arbitrary logit magnitudes.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& logits);

/// Zero mean, unit variance per row (I and Q), in place. Rows with (near)
/// zero variance are centered only.
template <typename Scalar>
void standardize_window(Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& window);

/// Mean cross-entropy over the batch plus lambda2 * sum(conv weights^2) plus
/// lambda1 * mean-over-batch of the first dense layer's activation L1 norm.
/// Inputs are consumed as given (no standardization, no dropout).
template <typename Scalar>
double loss(const CnnModel<Scalar>& model,
            const std::vector<Eigen::Matrix<Scalar, 2, Eigen::Dynamic>>& windows,
            const std::vector<int>& labels, const TrainConfig& cfg);

/// Exact reverse-mode gradient of `loss`, returned in a model-shaped
/// container. ReLU subgradient at 0 is 0; pooling ties route to the first
/// maximal index.
template <typename Scalar>
CnnModel<Scalar> grad(const CnnModel<Scalar>& model,
                      const std::vector<Eigen::Matrix<Scalar, 2, Eigen::Dynamic>>& windows,
                      const std::vector<int>& labels, const TrainConfig& cfg);

struct Prediction {
    int class_index = 0;
    std::string class_name;
    Eigen::VectorXd probabilities;
};

/// Standardizes the window and runs the network with dropout disabled.
template <typename Scalar>
Prediction predict(const CnnModel<Scalar>& model,
                   const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& window);

template <typename Scalar>
Prediction predict(const CnnModel<Scalar>& model, const LabeledWindow& window);

/// Stratified-split SGD with momentum. Deterministic for a fixed seed: batch
/// order, weight init, and dropout masks all derive from cfg.seed, and
/// gradient reduction follows batch order. Train metrics come from the
/// training-mode forward passes; validation accuracy is measured with
/// dropout off after each epoch.
template <typename Scalar>
std::pair<CnnModel<Scalar>, TrainHistory> train(const std::vector<LabeledWindow>& windows,
                                                const std::vector<LayerSpec>& arch,
                                                const TrainConfig& cfg);

/// Confusion matrix of model predictions over the selected windows (rows =
/// true class). Window labels must belong to the model's class set.
template <typename Scalar>
ConfusionMatrix evaluate(const CnnModel<Scalar>& model, const std::vector<LabeledWindow>& windows,
                         const std::vector<int>& indices);

/// Binary model file: magic "RSPC", u32 version, architecture table, float32
/// weight blobs. Round-trips float models losslessly.
void save_model(const CnnModel<float>& model, const std::filesystem::path& path);
CnnModel<float> load_model(const std::filesystem::path& path);

// --- implementation ---------------------------------------------------

namespace detail {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Activations flow time-major through these helpers: column m is feature
// map m, rows are time steps.

template <typename Scalar>
MatrixX<Scalar> conv_forward_tm(const MatrixX<Scalar>& in,
                                const typename CnnModel<Scalar>::ConvLayer& layer) {
    const Eigen::Index len_out = in.rows() - layer.kernels[0].cols() + 1;
    const Eigen::Index maps_out = static_cast<Eigen::Index>(layer.kernels.size());
    const Eigen::Index maps_in = in.cols();
    const Eigen::Index klen = layer.kernels[0].cols();
    MatrixX<Scalar> out(len_out, maps_out);
    for (Eigen::Index m = 0; m < maps_out; ++m) {
        out.col(m).setConstant(layer.bias[m]);
        const auto& k = layer.kernels[static_cast<std::size_t>(m)];
        for (Eigen::Index i = 0; i < maps_in; ++i)
            for (Eigen::Index l = 0; l < klen; ++l)
                out.col(m) += k(i, l) * in.col(i).segment(l, len_out);
    }
    return out.cwiseMax(Scalar(0));
}

template <typename Scalar>
MatrixX<Scalar> pool_forward_tm(const MatrixX<Scalar>& in, int pool_len,
                                Eigen::MatrixX<int>* argmax) {
    const Eigen::Index len_out = in.rows() / pool_len;
    MatrixX<Scalar> out(len_out, in.cols());
    if (argmax) argmax->resize(len_out, in.cols());
    for (Eigen::Index m = 0; m < in.cols(); ++m) {
        for (Eigen::Index q = 0; q < len_out; ++q) {
            Scalar best = in(q * pool_len, m);
            int best_h = 0;
            for (int h = 1; h < pool_len; ++h) {
                const Scalar v = in(q * pool_len + h, m);
                if (v > best) {  // strict: ties keep the first maximal index
                    best = v;
                    best_h = h;
                }
            }
            out(q, m) = best;
            if (argmax) (*argmax)(q, m) = best_h;
        }
    }
    return out;
}

template <typename Scalar>
struct ForwardCache {
    // Per layer: input as seen by the layer and post-activation output, plus
    // pooling argmax and the dropout mask applied to the output (empty when
    // unused).
    std::vector<MatrixX<Scalar>> input;
    std::vector<MatrixX<Scalar>> output;
    std::vector<Eigen::MatrixX<int>> pool_argmax;
    std::vector<MatrixX<Scalar>> dropout_mask;
    VectorX<Scalar> probabilities;
};

// Training-mode dropout context; null at inference.
struct DropoutCtx {
    std::mt19937_64* rng = nullptr;
};

template <typename Scalar>
VectorX<Scalar> forward(const CnnModel<Scalar>& model, const MatrixX<Scalar>& window_tm,
                        ForwardCache<Scalar>* cache, DropoutCtx* dropout) {
    const std::size_t n_layers = model.layers.size();
    if (cache) {
        cache->input.resize(n_layers);
        cache->output.resize(n_layers);
        cache->pool_argmax.resize(n_layers);
        cache->dropout_mask.resize(n_layers);
    }

    MatrixX<Scalar> act = window_tm;  // time-major
    VectorX<Scalar> probs;
    for (std::size_t li = 0; li < n_layers; ++li) {
        if (cache) cache->input[li] = act;
        double drop_p = 0.0;

        if (const auto* conv = std::get_if<typename CnnModel<Scalar>::ConvLayer>(&model.layers[li])) {
            if (act.rows() < conv->kernels[0].cols())
                throw std::invalid_argument("cnn: input shorter than convolution kernel");
            if (act.cols() != conv->kernels[0].rows())
                throw std::invalid_argument("cnn: feature map count mismatch at conv layer");
            act = conv_forward_tm<Scalar>(act, *conv);
            drop_p = conv->dropout_p;
        } else if (const auto* pool = std::get_if<typename CnnModel<Scalar>::PoolLayer>(&model.layers[li])) {
            act = pool_forward_tm<Scalar>(act, pool->len,
                                          cache ? &cache->pool_argmax[li] : nullptr);
            drop_p = pool->dropout_p;
        } else {
            const auto& dense = std::get<typename CnnModel<Scalar>::DenseLayer>(model.layers[li]);
            VectorX<Scalar> x = act.reshaped();
            if (x.size() != dense.weights.cols())
                throw std::invalid_argument("cnn: dense layer fan-in mismatch");
            VectorX<Scalar> z = dense.weights * x + dense.bias;
            if (dense.output) {
                probs = softmax<Scalar>(z);
                act = probs;
            } else {
                act = z.cwiseMax(Scalar(0));
                drop_p = dense.dropout_p;
            }
        }

        if (dropout && drop_p > 0.0) {
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            MatrixX<Scalar> mask(act.rows(), act.cols());
            const Scalar keep_scale = Scalar(1.0 / (1.0 - drop_p));
            for (Eigen::Index c = 0; c < act.cols(); ++c)
                for (Eigen::Index r = 0; r < act.rows(); ++r)
                    mask(r, c) = uni(*dropout->rng) < drop_p ? Scalar(0) : keep_scale;
            act = act.cwiseProduct(mask);
            if (cache) cache->dropout_mask[li] = mask;
        }
        if (cache) cache->output[li] = act;
    }
    if (cache) cache->probabilities = probs;
    return probs;
}

// Model-shaped zero container for gradients / momentum.
template <typename Scalar>
CnnModel<Scalar> zeros_like(const CnnModel<Scalar>& model) {
    CnnModel<Scalar> z = model;
    for (auto& layer : z.layers) {
        if (auto* conv = std::get_if<typename CnnModel<Scalar>::ConvLayer>(&layer)) {
            for (auto& k : conv->kernels) k.setZero();
            conv->bias.setZero();
        } else if (auto* dense = std::get_if<typename CnnModel<Scalar>::DenseLayer>(&layer)) {
            dense->weights.setZero();
            dense->bias.setZero();
        }
    }
    return z;
}

// Applies fn to every parameter array of a, paired with the same array of b.
template <typename Scalar, typename Fn>
void zip_params(CnnModel<Scalar>& a, CnnModel<Scalar>& b, Fn&& fn) {
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        if (auto* ca = std::get_if<typename CnnModel<Scalar>::ConvLayer>(&a.layers[li])) {
            auto& cb = std::get<typename CnnModel<Scalar>::ConvLayer>(b.layers[li]);
            for (std::size_t m = 0; m < ca->kernels.size(); ++m)
                fn(ca->kernels[m], cb.kernels[m]);
            fn(ca->bias, cb.bias);
        } else if (auto* da = std::get_if<typename CnnModel<Scalar>::DenseLayer>(&a.layers[li])) {
            auto& db = std::get<typename CnnModel<Scalar>::DenseLayer>(b.layers[li]);
            fn(da->weights, db.weights);
            fn(da->bias, db.bias);
        }
    }
}

// Backpropagates one sample's cross-entropy gradient into `grads`. `scale`
// is the weight of this sample in the batch mean (1/B). Dense-stage
// gradients travel as n x 1 matrices so one holder serves every layer kind.
template <typename Scalar>
void backward(const CnnModel<Scalar>& model, const ForwardCache<Scalar>& cache, int label,
              double scale, double lambda1, CnnModel<Scalar>& grads) {
    // Softmax + cross entropy: d logits = (p - onehot) * scale.
    MatrixX<Scalar> d_act = cache.probabilities * Scalar(scale);
    d_act(label, 0) -= Scalar(scale);

    for (std::size_t li = model.layers.size(); li-- > 0;) {
        // Dropout first: it was the last op applied to this layer's output.
        if (cache.dropout_mask[li].size() > 0)
            d_act = d_act.cwiseProduct(cache.dropout_mask[li]);

        if (const auto* dense = std::get_if<typename CnnModel<Scalar>::DenseLayer>(&model.layers[li])) {
            auto& g = std::get<typename CnnModel<Scalar>::DenseLayer>(grads.layers[li]);
            VectorX<Scalar> dz = d_act.reshaped();
            if (!dense->output) {
                // Undo dropout scaling to recover the kept activations, then
                // apply the L1 penalty subgradient and the ReLU mask.
                VectorX<Scalar> post = cache.output[li].reshaped();
                if (cache.dropout_mask[li].size() > 0) {
                    const VectorX<Scalar> mask = cache.dropout_mask[li].reshaped();
                    for (Eigen::Index i = 0; i < post.size(); ++i)
                        post[i] = mask[i] == Scalar(0) ? Scalar(0) : post[i] / mask[i];
                }
                if (static_cast<int>(li) == model.first_dense && lambda1 > 0.0) {
                    for (Eigen::Index i = 0; i < post.size(); ++i)
                        if (post[i] > Scalar(0)) dz[i] += Scalar(lambda1 * scale);
                }
                dz = dz.cwiseProduct(
                    (post.array() > Scalar(0)).template cast<Scalar>().matrix());
            }
            const VectorX<Scalar> x = cache.input[li].reshaped();
            g.weights.noalias() += dz * x.transpose();
            g.bias += dz;
            const VectorX<Scalar> dx = dense->weights.transpose() * dz;
            // Reshape back to the input's feature-map geometry.
            d_act = dx.reshaped(cache.input[li].rows(), cache.input[li].cols());
        } else if (const auto* pool = std::get_if<typename CnnModel<Scalar>::PoolLayer>(&model.layers[li])) {
            const auto& idx = cache.pool_argmax[li];
            MatrixX<Scalar> din = MatrixX<Scalar>::Zero(cache.input[li].rows(),
                                                        cache.input[li].cols());
            for (Eigen::Index m = 0; m < d_act.cols(); ++m)
                for (Eigen::Index q = 0; q < d_act.rows(); ++q)
                    din(q * pool->len + idx(q, m), m) += d_act(q, m);
            d_act = std::move(din);
        } else {
            const auto& conv = std::get<typename CnnModel<Scalar>::ConvLayer>(model.layers[li]);
            auto& g = std::get<typename CnnModel<Scalar>::ConvLayer>(grads.layers[li]);
            // ReLU mask from the stored post-activation (pre dropout the
            // zero set is identical, and dropout zeros only shrink it).
            MatrixX<Scalar> dpre =
                d_act.cwiseProduct((cache.output[li].array() > Scalar(0))
                                       .template cast<Scalar>()
                                       .matrix());
            const auto& in = cache.input[li];
            const Eigen::Index len_out = dpre.rows();
            const Eigen::Index klen = conv.kernels[0].cols();
            MatrixX<Scalar> din = MatrixX<Scalar>::Zero(in.rows(), in.cols());
            for (Eigen::Index m = 0; m < dpre.cols(); ++m) {
                g.bias[m] += dpre.col(m).sum();
                auto& gk = g.kernels[static_cast<std::size_t>(m)];
                const auto& k = conv.kernels[static_cast<std::size_t>(m)];
                for (Eigen::Index i = 0; i < in.cols(); ++i) {
                    for (Eigen::Index l = 0; l < klen; ++l) {
                        gk(i, l) += dpre.col(m).dot(in.col(i).segment(l, len_out));
                        din.col(i).segment(l, len_out) += k(i, l) * dpre.col(m);
                    }
                }
            }
            d_act = std::move(din);
        }
    }
}

template <typename Scalar>
MatrixX<Scalar> to_time_major(const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& window) {
    return window.transpose();
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> conv1d_forward(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& input,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& kernels,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& biases) {
    if (kernels.empty()) throw std::invalid_argument("conv1d_forward: no kernels");
    if (biases.size() != static_cast<Eigen::Index>(kernels.size()))
        throw std::invalid_argument("conv1d_forward: bias count != kernel count");
    for (const auto& k : kernels) {
        if (k.rows() != input.rows())
            throw std::invalid_argument("conv1d_forward: kernel input-map count mismatch");
        if (k.cols() < 1 || k.cols() > input.cols())
            throw std::invalid_argument("conv1d_forward: kernel longer than input");
    }
    typename CnnModel<Scalar>::ConvLayer layer;
    layer.kernels = kernels;
    layer.bias = biases;
    return detail::conv_forward_tm<Scalar>(input.transpose(), layer).transpose();
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> maxpool1d(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& input, int pool_len) {
    if (pool_len < 1) throw std::invalid_argument("maxpool1d: pool length must be >= 1");
    return detail::pool_forward_tm<Scalar>(input.transpose(), pool_len, nullptr).transpose();
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& logits) {
    if (logits.size() == 0) throw std::invalid_argument("softmax: empty logits");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        (logits.array() - logits.maxCoeff()).exp().matrix();
    out /= out.sum();
    return out;
}

template <typename Scalar>
void standardize_window(Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& window) {
    for (int r = 0; r < 2; ++r) {
        const Scalar mean = window.row(r).mean();
        window.row(r).array() -= mean;
        const Scalar var = window.row(r).squaredNorm() / Scalar(window.cols());
        const Scalar sd = std::sqrt(var);
        if (sd > Scalar(1e-12)) window.row(r) /= sd;
    }
}

template <typename Scalar>
CnnModel<Scalar> build_model(const std::vector<LayerSpec>& arch, int input_len,
                             std::vector<std::string> class_names, std::uint64_t seed) {
    if (arch.empty()) throw std::invalid_argument("cnn: empty architecture");
    if (arch.back().kind != LayerKind::Softmax)
        throw std::invalid_argument("cnn: final layer must be Softmax");
    if (class_names.size() < 2) throw std::invalid_argument("cnn: need at least 2 classes");
    if (arch.back().classes != static_cast<int>(class_names.size()))
        throw std::invalid_argument("cnn: softmax class count != class name count");
    if (input_len < 1) throw std::invalid_argument("cnn: input length must be >= 1");

    using Matrix = typename CnnModel<Scalar>::Matrix;
    using Vector = typename CnnModel<Scalar>::Vector;

    std::mt19937_64 rng(seed);
    // Explicit fill order keeps initialization reproducible.
    auto fill_gaussian = [&rng](Matrix& m, double sd) {
        std::normal_distribution<double> d(0.0, sd);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = Scalar(d(rng));
    };

    CnnModel<Scalar> model;
    model.arch = arch;
    model.input_len = input_len;
    model.class_names = std::move(class_names);

    Eigen::Index maps = 2;
    Eigen::Index len = input_len;
    bool flattened = false;
    for (std::size_t li = 0; li < arch.size(); ++li) {
        const LayerSpec& spec = arch[li];
        switch (spec.kind) {
            case LayerKind::Conv: {
                if (flattened) throw std::invalid_argument("cnn: conv after dense layer");
                if (spec.depth < 1 || spec.kernel_len < 1)
                    throw std::invalid_argument("cnn: conv depth/kernel must be >= 1");
                if (spec.kernel_len > len)
                    throw std::invalid_argument("cnn: kernel longer than feature maps");
                typename CnnModel<Scalar>::ConvLayer layer;
                layer.dropout_p = spec.dropout_p;
                layer.bias = Vector::Zero(spec.depth);
                const double sd = std::sqrt(2.0 / static_cast<double>(maps * spec.kernel_len));
                for (int m = 0; m < spec.depth; ++m) {
                    Matrix k(maps, spec.kernel_len);
                    fill_gaussian(k, sd);
                    layer.kernels.push_back(std::move(k));
                }
                model.layers.emplace_back(std::move(layer));
                len = len - spec.kernel_len + 1;
                maps = spec.depth;
                break;
            }
            case LayerKind::MaxPool: {
                if (flattened) throw std::invalid_argument("cnn: pool after dense layer");
                if (spec.pool_len < 1) throw std::invalid_argument("cnn: pool length must be >= 1");
                model.layers.emplace_back(
                    typename CnnModel<Scalar>::PoolLayer{spec.pool_len, spec.dropout_p});
                len = len / spec.pool_len;
                if (len < 1) throw std::invalid_argument("cnn: pooled length reached zero");
                break;
            }
            case LayerKind::Dense:
            case LayerKind::Softmax: {
                const bool output = spec.kind == LayerKind::Softmax;
                const int units = output ? spec.classes : spec.units;
                if (units < 1) throw std::invalid_argument("cnn: dense units must be >= 1");
                if (!output && li + 1 == arch.size())
                    throw std::invalid_argument("cnn: hidden dense cannot be final layer");
                const Eigen::Index fan_in = maps * len;
                typename CnnModel<Scalar>::DenseLayer layer;
                layer.output = output;
                layer.dropout_p = output ? 0.0 : spec.dropout_p;
                layer.bias = Vector::Zero(units);
                const double sd = output ? std::sqrt(1.0 / static_cast<double>(fan_in))
                                         : std::sqrt(2.0 / static_cast<double>(fan_in));
                layer.weights.resize(units, fan_in);
                fill_gaussian(layer.weights, sd);
                if (!output && model.first_dense < 0)
                    model.first_dense = static_cast<int>(li);
                model.layers.emplace_back(std::move(layer));
                flattened = true;
                maps = units;
                len = 1;
                break;
            }
        }
    }
    return model;
}

template <typename Scalar>
double loss(const CnnModel<Scalar>& model,
            const std::vector<Eigen::Matrix<Scalar, 2, Eigen::Dynamic>>& windows,
            const std::vector<int>& labels, const TrainConfig& cfg) {
    if (windows.empty()) throw std::invalid_argument("cnn loss: empty batch");
    if (windows.size() != labels.size())
        throw std::invalid_argument("cnn loss: window/label count mismatch");

    double ce = 0.0;
    double l1_sum = 0.0;
    detail::ForwardCache<Scalar> cache;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= model.num_classes())
            throw std::invalid_argument("cnn loss: label out of range");
        const auto probs =
            detail::forward<Scalar>(model, detail::to_time_major<Scalar>(windows[i]),
                                    &cache, nullptr);
        const double p = std::max(static_cast<double>(probs[labels[i]]), 1e-12);
        ce -= std::log(p);
        if (model.first_dense >= 0)
            l1_sum += static_cast<double>(
                cache.output[static_cast<std::size_t>(model.first_dense)].template lpNorm<1>());
    }
    const double batch = static_cast<double>(windows.size());

    double l2_sum = 0.0;
    for (const auto& layer : model.layers)
        if (const auto* conv = std::get_if<typename CnnModel<Scalar>::ConvLayer>(&layer))
            for (const auto& k : conv->kernels) l2_sum += static_cast<double>(k.squaredNorm());

    return ce / batch + cfg.lambda2 * l2_sum + cfg.lambda1 * l1_sum / batch;
}

template <typename Scalar>
CnnModel<Scalar> grad(const CnnModel<Scalar>& model,
                      const std::vector<Eigen::Matrix<Scalar, 2, Eigen::Dynamic>>& windows,
                      const std::vector<int>& labels, const TrainConfig& cfg) {
    if (windows.empty()) throw std::invalid_argument("cnn grad: empty batch");
    if (windows.size() != labels.size())
        throw std::invalid_argument("cnn grad: window/label count mismatch");

    CnnModel<Scalar> grads = detail::zeros_like(model);
    const double scale = 1.0 / static_cast<double>(windows.size());
    detail::ForwardCache<Scalar> cache;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= model.num_classes())
            throw std::invalid_argument("cnn grad: label out of range");
        detail::forward<Scalar>(model, detail::to_time_major<Scalar>(windows[i]), &cache,
                                nullptr);
        detail::backward<Scalar>(model, cache, labels[i], scale, cfg.lambda1, grads);
    }

    if (cfg.lambda2 > 0.0) {
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            if (const auto* conv =
                    std::get_if<typename CnnModel<Scalar>::ConvLayer>(&model.layers[li])) {
                auto& g = std::get<typename CnnModel<Scalar>::ConvLayer>(grads.layers[li]);
                for (std::size_t m = 0; m < conv->kernels.size(); ++m)
                    g.kernels[m] += Scalar(2.0 * cfg.lambda2) * conv->kernels[m];
            }
        }
    }
    return grads;
}

template <typename Scalar>
Prediction predict(const CnnModel<Scalar>& model,
                   const Eigen::Matrix<Scalar, 2, Eigen::Dynamic>& window) {
    if (static_cast<int>(window.cols()) != model.input_len)
        throw std::invalid_argument("cnn predict: window length != model input length");
    Eigen::Matrix<Scalar, 2, Eigen::Dynamic> w = window;
    standardize_window<Scalar>(w);
    const auto probs = detail::forward<Scalar>(model, detail::to_time_major<Scalar>(w),
                                               nullptr, nullptr);
    Prediction pred;
    pred.probabilities = probs.template cast<double>();
    Eigen::Index best;
    pred.probabilities.maxCoeff(&best);
    pred.class_index = static_cast<int>(best);
    pred.class_name = model.class_names[static_cast<std::size_t>(best)];
    return pred;
}

template <typename Scalar>
Prediction predict(const CnnModel<Scalar>& model, const LabeledWindow& window) {
    Eigen::Matrix<Scalar, 2, Eigen::Dynamic> w = window.iq.cast<Scalar>();
    return predict<Scalar>(model, w);
}

template <typename Scalar>
std::pair<CnnModel<Scalar>, TrainHistory> train(const std::vector<LabeledWindow>& windows,
                                                const std::vector<LayerSpec>& arch,
                                                const TrainConfig& cfg) {
    if (windows.empty()) throw std::invalid_argument("cnn train: empty dataset");
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw std::invalid_argument("cnn train: val_fraction must lie in (0, 1)");
    if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
        throw std::invalid_argument("cnn train: bad optimizer settings");

    const Eigen::Index R = windows.front().samples();
    for (const auto& w : windows)
        if (w.samples() != R) throw std::invalid_argument("cnn train: window lengths differ");

    // Classes present, in canonical activity order.
    std::vector<std::string> names;
    std::vector<int> class_of(windows.size());
    for (ActivityClass c : {ActivityClass::Breathing, ActivityClass::Static,
                            ActivityClass::RandomMotion}) {
        bool present = false;
        for (const auto& w : windows) present |= w.label.cls == c;
        if (present) names.emplace_back(to_string(c));
    }
    if (names.size() < 2)
        throw std::invalid_argument("cnn train: need at least 2 classes in the dataset");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const std::string n = to_string(windows[i].label.cls);
        class_of[i] = static_cast<int>(
            std::find(names.begin(), names.end(), n) - names.begin());
    }

    std::vector<LayerSpec> effective_arch = arch;
    if (cfg.dropout_p) {
        for (auto& spec : effective_arch)
            if (spec.kind != LayerKind::Softmax) spec.dropout_p = *cfg.dropout_p;
    }

    auto model = build_model<Scalar>(effective_arch, static_cast<int>(R), names,
                                     derive_seed(cfg.seed, 1));
    TrainHistory history;
    if (cfg.epochs == 0) return {std::move(model), std::move(history)};

    const SplitIndices split = split_dataset(windows, cfg.val_fraction, cfg.seed);

    // Standardized copies, train side and validation side.
    std::vector<Eigen::Matrix<Scalar, 2, Eigen::Dynamic>> prepared(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        prepared[i] = windows[i].iq.cast<Scalar>();
        standardize_window<Scalar>(prepared[i]);
    }

    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 2));
    std::mt19937_64 dropout_rng(derive_seed(cfg.seed, 3));
    detail::DropoutCtx dropout{&dropout_rng};

    CnnModel<Scalar> velocity = detail::zeros_like(model);
    std::vector<int> order = split.train;
    double lr_epoch = cfg.learning_rate;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_ce = 0.0;
        long correct = 0;
        long seen = 0;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double scale = 1.0 / static_cast<double>(stop - start);

            CnnModel<Scalar> grads = detail::zeros_like(model);
            detail::ForwardCache<Scalar> cache;
            double batch_ce = 0.0;
            double batch_l1 = 0.0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const int idx = order[bi];
                const int label = class_of[static_cast<std::size_t>(idx)];
                const auto probs = detail::forward<Scalar>(
                    model, detail::to_time_major<Scalar>(prepared[static_cast<std::size_t>(idx)]),
                    &cache, &dropout);
                const double p = std::max(static_cast<double>(probs[label]), 1e-12);
                batch_ce -= std::log(p);
                if (model.first_dense >= 0)
                    batch_l1 += static_cast<double>(
                        cache.output[static_cast<std::size_t>(model.first_dense)]
                            .template lpNorm<1>());
                Eigen::Index argmax;
                probs.maxCoeff(&argmax);
                correct += argmax == label;
                ++seen;
                detail::backward<Scalar>(model, cache, label, scale, cfg.lambda1, grads);
            }

            if (cfg.lambda2 > 0.0) {
                for (std::size_t li = 0; li < model.layers.size(); ++li)
                    if (auto* conv = std::get_if<typename CnnModel<Scalar>::ConvLayer>(
                            &model.layers[li])) {
                        auto& g = std::get<typename CnnModel<Scalar>::ConvLayer>(grads.layers[li]);
                        for (std::size_t m = 0; m < conv->kernels.size(); ++m)
                            g.kernels[m] += Scalar(2.0 * cfg.lambda2) * conv->kernels[m];
                    }
            }

            // SGD with momentum: v <- momentum v - lr g; w <- w + v.
            const Scalar lr = Scalar(lr_epoch);
            const Scalar mom = Scalar(cfg.momentum);
            detail::zip_params<Scalar>(velocity, grads, [lr, mom](auto& v, auto& g) {
                v = mom * v - lr * g;
            });
            detail::zip_params<Scalar>(model, velocity, [](auto& w, auto& v) { w += v; });

            double l2_sum = 0.0;
            for (const auto& layer : model.layers)
                if (const auto* conv =
                        std::get_if<typename CnnModel<Scalar>::ConvLayer>(&layer))
                    for (const auto& k : conv->kernels)
                        l2_sum += static_cast<double>(k.squaredNorm());
            epoch_ce += batch_ce + cfg.lambda1 * batch_l1 +
                        cfg.lambda2 * l2_sum * static_cast<double>(stop - start);
        }

        history.train_loss.push_back(epoch_ce / static_cast<double>(order.size()));
        history.train_accuracy.push_back(static_cast<double>(correct) /
                                         static_cast<double>(seen));

        long val_correct = 0;
        for (int idx : split.val) {
            const auto probs = detail::forward<Scalar>(
                model, detail::to_time_major<Scalar>(prepared[static_cast<std::size_t>(idx)]),
                nullptr, nullptr);
            Eigen::Index argmax;
            probs.maxCoeff(&argmax);
            val_correct += argmax == class_of[static_cast<std::size_t>(idx)];
        }
        history.val_accuracy.push_back(
            split.val.empty() ? 0.0
                              : static_cast<double>(val_correct) /
                                    static_cast<double>(split.val.size()));
        lr_epoch *= cfg.lr_decay;
    }
    return {std::move(model), std::move(history)};
}

template <typename Scalar>
ConfusionMatrix evaluate(const CnnModel<Scalar>& model, const std::vector<LabeledWindow>& windows,
                         const std::vector<int>& indices) {
    ConfusionMatrix conf(model.class_names);
    for (int idx : indices) {
        const auto& w = windows[static_cast<std::size_t>(idx)];
        const std::string name = to_string(w.label.cls);
        const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
        if (it == model.class_names.end())
            throw std::invalid_argument("cnn evaluate: window class not in model: " + name);
        const auto pred = predict<Scalar>(model, w);
        conf.add(static_cast<int>(it - model.class_names.begin()), pred.class_index);
    }
    return conf;
}

}  // namespace respi::cnn

#endif  // RESPI_CNN_HPP
