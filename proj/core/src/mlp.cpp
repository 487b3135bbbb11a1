#include "pinnmpc/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pinnmpc {

namespace {
constexpr char kMagic[12] = {'P', 'I', 'N', 'N', 'M', 'P', 'C', '-', 'M', 'L', 'P', '\n'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

MlpModel MlpModel::make(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("MlpModel: need at least input and output layer");
    MlpModel m;
    m.layer_sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        Eigen::MatrixXd w(fan_out, fan_in);
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = std_dev * rng.normal();
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    m.in_mean = Eigen::VectorXd::Zero(sizes.front());
    m.in_scale = Eigen::VectorXd::Ones(sizes.front());
    m.out_mean = Eigen::VectorXd::Zero(sizes.back());
    m.out_scale = Eigen::VectorXd::Ones(sizes.back());
    return m;
}

void MlpModel::validate() const {
    if (layer_sizes.size() < 2 || weights.size() != layer_sizes.size() - 1 ||
        biases.size() != weights.size())
        throw std::invalid_argument("MlpModel: inconsistent layer bookkeeping");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
            biases[l].size() != layer_sizes[l + 1])
            throw std::invalid_argument("MlpModel: layer dimensions do not chain");
    }
    if (in_mean.size() != input_dim() || in_scale.size() != input_dim() ||
        out_mean.size() != output_dim() || out_scale.size() != output_dim())
        throw std::invalid_argument("MlpModel: normalization dimensions mismatch");
    if ((in_scale.array() <= 0).any() || (out_scale.array() <= 0).any())
        throw std::invalid_argument("MlpModel: normalization scales must be strictly positive");
}

void MlpModel::Gradients::init_like(const MlpModel& m) {
    dW.clear();
    db.clear();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        dW.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
        db.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    }
}

void MlpModel::Gradients::add_scaled(const Gradients& other, double s) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
        dW[l] += s * other.dW[l];
        db[l] += s * other.db[l];
    }
}

void MlpModel::Gradients::scale(double s) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
        dW[l] *= s;
        db[l] *= s;
    }
}

Eigen::MatrixXd MlpModel::forward_normalized(const Eigen::MatrixXd& vn, Cache* cache) const {
    const int L = n_layers();
    Eigen::MatrixXd a = vn;
    if (cache) {
        cache->input = vn;
        cache->preacts.clear();
        cache->acts.clear();
    }
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd z = (weights[static_cast<std::size_t>(l)] * a).colwise() +
                            biases[static_cast<std::size_t>(l)];
        if (l + 1 < L) a = z.cwiseMax(0.0);
        else a = z;
        if (cache) {
            cache->preacts.push_back(z);
            cache->acts.push_back(a);
        }
    }
    return a;
}

Eigen::MatrixXd MlpModel::backward_normalized(const Cache& cache, const Eigen::MatrixXd& upstream,
                                              Gradients* grads) const {
    const int L = n_layers();
    const auto cols = upstream.cols();
    Eigen::MatrixXd abar = upstream;
    for (int l = L - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        Eigen::MatrixXd zbar;
        if (l + 1 < L)
            zbar = (cache.preacts[lu].array() > 0.0).cast<double>() * abar.array();
        else
            zbar = abar;
        if (grads) {
            const Eigen::MatrixXd& prev = l > 0 ? cache.acts[lu - 1] : cache.input;
            grads->dW[lu] += zbar * prev.transpose();
            grads->db[lu] += zbar.rowwise().sum();
        }
        abar = weights[lu].transpose() * zbar;
    }
    (void)cols;
    return abar;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> MlpModel::jvp_normalized(
    const Eigen::MatrixXd& vn, const Eigen::MatrixXd& tangent_in, DualCache* cache) const {
    const int L = n_layers();
    Eigen::MatrixXd a = vn;
    Eigen::MatrixXd s = tangent_in;
    if (cache) {
        cache->primal.input = vn;
        cache->primal.preacts.clear();
        cache->primal.acts.clear();
        cache->tangent_in = tangent_in;
        cache->tangent_pre.clear();
        cache->tangent.clear();
    }
    for (int l = 0; l < L; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        Eigen::MatrixXd z = (weights[lu] * a).colwise() + biases[lu];
        Eigen::MatrixXd t = weights[lu] * s;
        if (l + 1 < L) {
            Eigen::ArrayXXd mask = (z.array() > 0.0).cast<double>();
            a = z.cwiseMax(0.0);
            s = (mask * t.array()).matrix();
        } else {
            a = z;
            s = t;
        }
        if (cache) {
            cache->primal.preacts.push_back(z);
            cache->primal.acts.push_back(a);
            cache->tangent_pre.push_back(t);
            cache->tangent.push_back(s);
        }
    }
    return {a, s};
}

Eigen::MatrixXd MlpModel::jvp_backward_normalized(const DualCache& cache,
                                                  const Eigen::MatrixXd& upstream_y,
                                                  const Eigen::MatrixXd& upstream_s,
                                                  Gradients* grads) const {
    const int L = n_layers();
    Eigen::MatrixXd abar = upstream_y;  // d/da_l (primal path)
    Eigen::MatrixXd sbar = upstream_s;  // d/ds_l (tangent path)
    for (int l = L - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        Eigen::MatrixXd zbar, tbar;
        if (l + 1 < L) {
            Eigen::ArrayXXd mask = (cache.primal.preacts[lu].array() > 0.0).cast<double>();
            zbar = (mask * abar.array()).matrix();
            tbar = (mask * sbar.array()).matrix();
        } else {
            zbar = abar;
            tbar = sbar;
        }
        if (grads) {
            const Eigen::MatrixXd& prev_a = l > 0 ? cache.primal.acts[lu - 1] : cache.primal.input;
            const Eigen::MatrixXd& prev_s = l > 0 ? cache.tangent[lu - 1] : cache.tangent_in;
            grads->dW[lu] += zbar * prev_a.transpose() + tbar * prev_s.transpose();
            grads->db[lu] += zbar.rowwise().sum();
        }
        abar = weights[lu].transpose() * zbar;
        sbar = weights[lu].transpose() * tbar;
    }
    return abar;
}

Eigen::VectorXd MlpModel::normalize_input(const Eigen::VectorXd& v) const {
    return (v - in_mean).cwiseQuotient(in_scale);
}

Eigen::VectorXd MlpModel::denormalize_output(const Eigen::VectorXd& yn) const {
    return out_mean + out_scale.cwiseProduct(yn);
}

Eigen::VectorXd MlpModel::normalize_output(const Eigen::VectorXd& y) const {
    return (y - out_mean).cwiseQuotient(out_scale);
}

MlpModel::Prediction MlpModel::predict(const Vec12& x, const Vec12& u, double T,
                                       const Eigen::Vector4d& omega) const {
    if (input_dim() != 29 || output_dim() != 12)
        throw std::logic_error("MlpModel::predict: not a 29->12 surrogate");
    Eigen::VectorXd v(29);
    v << x, u, T, omega;
    if (!v.allFinite()) throw std::invalid_argument("MlpModel::predict: non-finite inputs");
    Eigen::MatrixXd yn = forward_normalized(normalize_input(v));
    Prediction p;
    p.x_next = denormalize_output(yn.col(0));
    const double tol = 1e-12;
    p.extrapolated = T < t_min - tol || T > t_max + tol;
    return p;
}

Eigen::MatrixXd MlpModel::input_jacobian(const Eigen::VectorXd& v) const {
    const int n_out = output_dim();
    Eigen::VectorXd vn = normalize_input(v);
    Cache cache;
    forward_normalized(vn.replicate(1, n_out), &cache);
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Identity(n_out, n_out);
    Eigen::MatrixXd in_grads = backward_normalized(cache, upstream);  // input_dim x n_out
    // chain the normalizations: dy/dv = S_out * (dy_n/dv_n)^T * S_in^{-1}
    Eigen::MatrixXd J = in_grads.transpose();
    J.array().colwise() *= out_scale.array();
    J.array().rowwise() /= in_scale.transpose().array();
    return J;
}

Eigen::Index MlpModel::parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

Eigen::VectorXd MlpModel::parameters() const {
    Eigen::VectorXd theta(parameter_count());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        theta.segment(off, weights[l].size()) =
            Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
        off += weights[l].size();
        theta.segment(off, biases[l].size()) = biases[l];
        off += biases[l].size();
    }
    return theta;
}

void MlpModel::set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count())
        throw std::invalid_argument("MlpModel::set_parameters: size mismatch");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Eigen::Map<Eigen::VectorXd>(weights[l].data(), weights[l].size()) =
            theta.segment(off, weights[l].size());
        off += weights[l].size();
        biases[l] = theta.segment(off, biases[l].size());
        off += biases[l].size();
    }
}

Eigen::VectorXd MlpModel::flatten(const Gradients& grads) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < grads.dW.size(); ++l) n += grads.dW[l].size() + grads.db[l].size();
    Eigen::VectorXd g(n);
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < grads.dW.size(); ++l) {
        g.segment(off, grads.dW[l].size()) =
            Eigen::Map<const Eigen::VectorXd>(grads.dW[l].data(), grads.dW[l].size());
        off += grads.dW[l].size();
        g.segment(off, grads.db[l].size()) = grads.db[l];
        off += grads.db[l].size();
    }
    return g;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated while reading " + what);
    return v;
}

void write_vector(std::ofstream& out, const Eigen::VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double)) * v.size());
}

Eigen::VectorXd read_vector(std::ifstream& in, Eigen::Index n, const std::string& what) {
    Eigen::VectorXd v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double)) * n);
    if (!in) throw std::runtime_error("checkpoint truncated while reading " + what);
    return v;
}

}  // namespace

void MlpModel::save_checkpoint(const std::string& path) const {
    validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(layer_sizes.size()));
    for (int s : layer_sizes) write_pod(out, static_cast<std::uint32_t>(s));
    write_pod(out, t_min);
    write_pod(out, t_max);
    write_vector(out, in_mean);
    write_vector(out, in_scale);
    write_vector(out, out_mean);
    write_vector(out, out_scale);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        // row-major blobs as documented
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr = weights[l];
        out.write(reinterpret_cast<const char*>(wr.data()),
                  static_cast<std::streamsize>(sizeof(double)) * wr.size());
        write_vector(out, biases[l]);
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

MlpModel MlpModel::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic string in " + path);
    const auto version = read_pod<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw std::runtime_error("load_checkpoint: version " + std::to_string(version) +
                                 " unsupported, expected " + std::to_string(kVersion));
    const auto n_sizes = read_pod<std::uint32_t>(in, "layer count");
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("load_checkpoint: corrupt layer count");
    MlpModel m;
    for (std::uint32_t i = 0; i < n_sizes; ++i)
        m.layer_sizes.push_back(static_cast<int>(read_pod<std::uint32_t>(in, "layer size")));
    m.t_min = read_pod<double>(in, "t_min");
    m.t_max = read_pod<double>(in, "t_max");
    m.in_mean = read_vector(in, m.layer_sizes.front(), "in_mean");
    m.in_scale = read_vector(in, m.layer_sizes.front(), "in_scale");
    m.out_mean = read_vector(in, m.layer_sizes.back(), "out_mean");
    m.out_scale = read_vector(in, m.layer_sizes.back(), "out_scale");
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const Eigen::Index rows = m.layer_sizes[l + 1];
        const Eigen::Index cols = m.layer_sizes[l];
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr(rows, cols);
        in.read(reinterpret_cast<char*>(wr.data()),
                static_cast<std::streamsize>(sizeof(double)) * rows * cols);
        if (!in) throw std::runtime_error("checkpoint truncated while reading weights");
        m.weights.push_back(wr);
        m.biases.push_back(read_vector(in, rows, "biases"));
    }
    m.validate();
    return m;
}

void fit_normalization(const Eigen::MatrixXd& features, Eigen::VectorXd& mean,
                       Eigen::VectorXd& scale, double floor) {
    const double n = static_cast<double>(features.cols());
    mean = features.rowwise().mean();
    Eigen::MatrixXd centered = features.colwise() - mean;
    scale = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
    scale = scale.cwiseMax(floor);
}

}  // namespace pinnmpc
