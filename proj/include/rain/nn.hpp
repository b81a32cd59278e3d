#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rain/errors.hpp"
#include "rain/paramset.hpp"
#include "rain/rng.hpp"

// Parameterized differentiable blocks shared by every learned module.
// Everything is templated on the scalar so the production float path and the
// double path used by gradient checking run the exact same code.
namespace rain::nn {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
MatX<S> sigmoid(const MatX<S>& z) {
    return z.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
}

// Named reference to one live parameter matrix; the unit models assemble
// lists of these for the optimizer and for ParamSet conversion.
template <class S>
struct ParamRef {
    std::string name;
    MatX<S>* mat;
};

template <class S>
ParamSet to_paramset(const std::vector<ParamRef<S>>& refs,
                     std::uint32_t version = 0) {
    ParamSet ps;
    ps.version = version;
    for (const auto& r : refs) {
        std::vector<float> data(static_cast<std::size_t>(r.mat->size()));
        const MatX<S>& m = *r.mat;
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                data[k++] = static_cast<float>(m(i, j));
        ps.add(r.name,
               {static_cast<std::uint32_t>(m.rows()),
                static_cast<std::uint32_t>(m.cols())},
               std::move(data));
    }
    return ps;
}

template <class S>
void from_paramset(const ParamSet& ps, const std::vector<ParamRef<S>>& refs) {
    for (const auto& r : refs) {
        const auto& t = ps.get(r.name);
        if (t.dims.size() != 2 ||
            t.dims[0] != static_cast<std::uint32_t>(r.mat->rows()) ||
            t.dims[1] != static_cast<std::uint32_t>(r.mat->cols()))
            throw contract_error("tensor '" + r.name + "' has unexpected shape");
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < r.mat->rows(); ++i)
            for (Eigen::Index j = 0; j < r.mat->cols(); ++j)
                (*r.mat)(i, j) = static_cast<S>(t.data[k++]);
    }
}

// ---------------------------------------------------------------------------
// Affine layer and MLP (alternating affine maps and rectifiers).

template <class S>
struct Affine {
    MatX<S> W;  // (out, in)
    MatX<S> b;  // (1, out)

    static Affine make(int in, int out, Rng& rng) {
        Affine a;
        a.W.resize(out, in);
        a.b = MatX<S>::Zero(1, out);
        const double k = 1.0 / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j)
                a.W(i, j) = static_cast<S>(rng.uniform(-k, k));
        return a;
    }

    Affine like_zero() const {
        Affine a;
        a.W = MatX<S>::Zero(W.rows(), W.cols());
        a.b = MatX<S>::Zero(1, b.cols());
        return a;
    }
};

template <class S>
struct Mlp {
    std::vector<Affine<S>> layers;

    // sizes = {in, h1, ..., out}; rectifier after every layer except the last.
    static Mlp make(const std::vector<int>& sizes, Rng& rng) {
        Mlp m;
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
            m.layers.push_back(Affine<S>::make(sizes[i], sizes[i + 1], rng));
        return m;
    }

    Mlp like_zero() const {
        Mlp m;
        for (const auto& l : layers) m.layers.push_back(l.like_zero());
        return m;
    }

    int in_dim() const { return static_cast<int>(layers.front().W.cols()); }
    int out_dim() const { return static_cast<int>(layers.back().W.rows()); }

    struct Cache {
        std::vector<MatX<S>> x;  // input to each layer
    };

    // X is (batch, in). Returns (batch, out).
    MatX<S> forward(const MatX<S>& X, Cache* cache = nullptr) const {
        if (X.cols() != in_dim())
            throw contract_error("mlp_forward: input dimension mismatch");
        if (cache) cache->x.clear();
        MatX<S> h = X;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (cache) cache->x.push_back(h);
            h = (h * layers[i].W.transpose()).rowwise() + layers[i].b.row(0);
            if (i + 1 < layers.size()) h = h.cwiseMax(S(0));
        }
        return h;
    }

    // Accumulates parameter gradients into `grad` (same shapes) and returns
    // the gradient with respect to the input. `Y` must be the forward output
    // (used for the rectifier masks of hidden layers via cache).
    MatX<S> backward(const Cache& cache, const MatX<S>& dY, Mlp& grad) const {
        MatX<S> d = dY;
        for (std::size_t i = layers.size(); i-- > 0;) {
            if (i + 1 < layers.size()) {
                // d arrived through the rectifier of layer i; mask by the
                // post-activation stored as the next layer's input.
                d = d.cwiseProduct(
                    cache.x[i + 1]
                        .unaryExpr([](S v) { return v > S(0) ? S(1) : S(0); }));
            }
            grad.layers[i].W.noalias() += d.transpose() * cache.x[i];
            grad.layers[i].b.row(0) += d.colwise().sum();
            if (i > 0)
                d = (d * layers[i].W).eval();
            else
                d = d * layers[i].W;
        }
        return d;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            out.push_back({prefix + ".w" + std::to_string(i), &layers[i].W});
            out.push_back({prefix + ".b" + std::to_string(i), &layers[i].b});
        }
    }
};

// Hidden-layer rectifier mask bug guard: Mlp::backward reads cache.x[i+1],
// which only exists when forward() ran with the same cache object.

// ---------------------------------------------------------------------------
// LSTM cell, gate order [input, forget, cell, output] along the 4H axis.

template <class S>
struct LstmCell {
    MatX<S> Wx;  // (4H, in)
    MatX<S> Wh;  // (4H, H)
    MatX<S> b;   // (1, 4H)

    static LstmCell make(int in, int hidden, Rng& rng) {
        LstmCell c;
        c.Wx.resize(4 * hidden, in);
        c.Wh.resize(4 * hidden, hidden);
        c.b = MatX<S>::Zero(1, 4 * hidden);
        const double kx = 1.0 / std::sqrt(static_cast<double>(in));
        const double kh = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (int i = 0; i < 4 * hidden; ++i)
            for (int j = 0; j < in; ++j)
                c.Wx(i, j) = static_cast<S>(rng.uniform(-kx, kx));
        for (int i = 0; i < 4 * hidden; ++i)
            for (int j = 0; j < hidden; ++j)
                c.Wh(i, j) = static_cast<S>(rng.uniform(-kh, kh));
        // Forget-gate bias starts at 1 so fresh cells retain state.
        c.b.row(0).segment(hidden, hidden).setConstant(S(1));
        return c;
    }

    LstmCell like_zero() const {
        LstmCell c;
        c.Wx = MatX<S>::Zero(Wx.rows(), Wx.cols());
        c.Wh = MatX<S>::Zero(Wh.rows(), Wh.cols());
        c.b = MatX<S>::Zero(1, b.cols());
        return c;
    }

    int hidden() const { return static_cast<int>(Wh.cols()); }
    int in_dim() const { return static_cast<int>(Wx.cols()); }

    struct Cache {
        MatX<S> x, hprev, cprev, i, f, g, o, c, tanhc;
    };

    // One recurrent step over a batch of rows.
    void step(const MatX<S>& x, const MatX<S>& hprev, const MatX<S>& cprev,
              MatX<S>& hout, MatX<S>& cout, Cache* cache = nullptr) const {
        const int H = hidden();
        if (x.cols() != in_dim() || hprev.cols() != H || cprev.cols() != H)
            throw contract_error("recurrent_step: dimension mismatch");
        MatX<S> z = x * Wx.transpose();
        z.noalias() += hprev * Wh.transpose();
        z.rowwise() += b.row(0);
        const auto B = x.rows();
        MatX<S> i = sigmoid<S>(z.block(0, 0, B, H));
        MatX<S> f = sigmoid<S>(z.block(0, H, B, H));
        MatX<S> g = z.block(0, 2 * H, B, H).array().tanh().matrix();
        MatX<S> o = sigmoid<S>(z.block(0, 3 * H, B, H));
        cout = f.cwiseProduct(cprev) + i.cwiseProduct(g);
        MatX<S> tc = cout.array().tanh().matrix();
        hout = o.cwiseProduct(tc);
        if (cache) {
            cache->x = x;
            cache->hprev = hprev;
            cache->cprev = cprev;
            cache->i = std::move(i);
            cache->f = std::move(f);
            cache->g = std::move(g);
            cache->o = std::move(o);
            cache->c = cout;
            cache->tanhc = std::move(tc);
        }
    }

    // dh/dc_in are gradients flowing into h_t and c_t. Accumulates parameter
    // gradients into `grad`, adds dx into `dx` and writes dhprev/dcprev.
    void backward(const Cache& cache, const MatX<S>& dh, const MatX<S>& dc_in,
                  MatX<S>& dx, MatX<S>& dhprev, MatX<S>& dcprev,
                  LstmCell& grad) const {
        const int H = hidden();
        const auto B = cache.x.rows();
        MatX<S> one = MatX<S>::Ones(B, H);
        MatX<S> dc = dc_in +
                     dh.cwiseProduct(cache.o)
                         .cwiseProduct(one - cache.tanhc.cwiseProduct(cache.tanhc));
        MatX<S> dz(B, 4 * H);
        // d pre-activations: sigmoid' = s(1-s), tanh' = 1-g^2
        dz.block(0, 0, B, H) = dc.cwiseProduct(cache.g)
                                   .cwiseProduct(cache.i)
                                   .cwiseProduct(one - cache.i);
        dz.block(0, H, B, H) = dc.cwiseProduct(cache.cprev)
                                   .cwiseProduct(cache.f)
                                   .cwiseProduct(one - cache.f);
        dz.block(0, 2 * H, B, H) = dc.cwiseProduct(cache.i)
                                       .cwiseProduct(one - cache.g.cwiseProduct(cache.g));
        dz.block(0, 3 * H, B, H) = dh.cwiseProduct(cache.tanhc)
                                       .cwiseProduct(cache.o)
                                       .cwiseProduct(one - cache.o);
        grad.Wx.noalias() += dz.transpose() * cache.x;
        grad.Wh.noalias() += dz.transpose() * cache.hprev;
        grad.b.row(0) += dz.colwise().sum();
        dx.noalias() += dz * Wx;
        dhprev = dz * Wh;
        dcprev = dc.cwiseProduct(cache.f);
    }

    void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
        out.push_back({prefix + ".wx", &Wx});
        out.push_back({prefix + ".wh", &Wh});
        out.push_back({prefix + ".b", &b});
    }
};

// ---------------------------------------------------------------------------
// Adaptive-moment gradient descent over a flat list of parameter matrices.

template <class S>
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<MatX<S>> m, v;
    long t = 0;

    void init(const std::vector<MatX<S>*>& params) {
        m.clear();
        v.clear();
        for (auto* p : params) {
            m.push_back(MatX<S>::Zero(p->rows(), p->cols()));
            v.push_back(MatX<S>::Zero(p->rows(), p->cols()));
        }
        t = 0;
    }

    void step(const std::vector<MatX<S>*>& params,
              const std::vector<const MatX<S>*>& grads) {
        if (params.size() != m.size() || grads.size() != m.size())
            throw contract_error("optimizer step: parameter list mismatch");
        ++t;
        const S c1 = static_cast<S>(1.0 - std::pow(beta1, t));
        const S c2 = static_cast<S>(1.0 - std::pow(beta2, t));
        const S b1 = static_cast<S>(beta1), b2 = static_cast<S>(beta2);
        const S a = static_cast<S>(lr), e = static_cast<S>(eps);
        for (std::size_t k = 0; k < params.size(); ++k) {
            const MatX<S>& g = *grads[k];
            m[k] = b1 * m[k] + (S(1) - b1) * g;
            v[k] = b2 * v[k] + (S(1) - b2) * g.cwiseProduct(g);
            MatX<S> mh = m[k] / c1;
            MatX<S> vh = v[k] / c2;
            params[k]->array() -=
                a * mh.array() / (vh.array().sqrt() + e);
        }
    }
};

// ---------------------------------------------------------------------------
// Gradient checking (double precision): central finite differences at a
// random sample of coordinates against a caller-supplied analytic gradient.

inline double grad_check(const std::vector<MatX<double>*>& params,
                         const std::vector<const MatX<double>*>& analytic,
                         const std::function<double()>& value_fn, Rng& rng,
                         int n_coords = 150, double h = 1e-5) {
    if (params.size() != analytic.size())
        throw contract_error("grad_check: gradient list mismatch");
    std::size_t total = 0;
    for (auto* p : params) total += static_cast<std::size_t>(p->size());
    double worst = 0.0;
    const int checks = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(n_coords), total));
    for (int k = 0; k < checks; ++k) {
        std::size_t flat = rng.uniform_int(total);
        std::size_t which = 0;
        while (flat >= static_cast<std::size_t>(params[which]->size()))
            flat -= static_cast<std::size_t>(params[which++]->size());
        double* slot = params[which]->data() + flat;
        const double saved = *slot;
        *slot = saved + h;
        const double fp = value_fn();
        *slot = saved - h;
        const double fm = value_fn();
        *slot = saved;
        const double num = (fp - fm) / (2.0 * h);
        const double ana = analytic[which]->data()[flat];
        const double rel =
            std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1.0});
        worst = std::max(worst, rel);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Two-class softmax cross-entropy (used by the supervised edge classifier).

template <class S>
double softmax_xent(const MatX<S>& logits, const std::vector<int>& labels,
                    MatX<S>* dlogits = nullptr) {
    const auto B = logits.rows();
    if (static_cast<std::size_t>(B) != labels.size())
        throw contract_error("softmax_xent: label count mismatch");
    if (dlogits) dlogits->setZero(B, logits.cols());
    double loss = 0.0;
    for (Eigen::Index r = 0; r < B; ++r) {
        const S mx = logits.row(r).maxCoeff();
        Eigen::Array<S, 1, Eigen::Dynamic> ex =
            (logits.row(r).array() - mx).exp();
        const S Z = ex.sum();
        loss -= std::log(static_cast<double>(ex(labels[r]) / Z));
        if (dlogits) {
            dlogits->row(r) = (ex / Z).matrix() / static_cast<S>(B);
            (*dlogits)(r, labels[r]) -= S(1) / static_cast<S>(B);
        }
    }
    return loss / static_cast<double>(B);
}

}  // namespace rain::nn
