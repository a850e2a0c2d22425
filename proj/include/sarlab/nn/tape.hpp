#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sarlab/nn/param.hpp"
#include "sarlab/nn/tensor.hpp"

namespace sarlab::nn {

// Reverse-mode tape. Each op computes its value eagerly and records a closure
// that scatters output-gradient into input-gradient slots. Parameters enter as
// leaves aliasing their persistent value/grad buffers, so one backward() pass
// leaves per-parameter gradients ready for the optimizer. Everything runs
// single-threaded in recorded order, which keeps training bit-reproducible.
template <typename T>
class Tape {
public:
    using Var = int;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void reset() {
        slots_.clear();
        backward_ops_.clear();
    }

    const Shape4& shape(Var v) const { return slots_[v].shape; }
    // vptr/gptr alias parameter storage for leaves; owned slots keep nullptr
    // so vector reallocation can never dangle.
    std::vector<T>& val(Var v) {
        Slot& s = slots_[v];
        return s.vptr ? *s.vptr : s.own_val;
    }
    const std::vector<T>& val(Var v) const {
        const Slot& s = slots_[v];
        return s.vptr ? *s.vptr : s.own_val;
    }
    std::vector<T>& grad(Var v) {
        Slot& s = slots_[v];
        return s.gptr ? *s.gptr : s.own_grad;
    }

    // -- leaves --------------------------------------------------------------

    Var leaf(Param<T>& p) {
        p.zero_grad();
        Slot s;
        s.shape = p.shape;
        s.vptr = &p.value;
        s.gptr = &p.grad;
        slots_.push_back(std::move(s));
        return static_cast<Var>(slots_.size()) - 1;
    }

    // Constant input (images, encoded labels): gradient buffer exists but is
    // never consumed.
    Var input(Shape4 shape, std::vector<T> data) {
        if (data.size() != shape.count()) throw ContractError("input: data/shape mismatch");
        return make_slot(shape, std::move(data));
    }

    // -- elementwise ---------------------------------------------------------

    Var relu(Var x) {
        const auto& xv = val(x);
        std::vector<T> y(xv.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = xv[i] > T(0) ? xv[i] : T(0);
        Var o = make_slot(shape(x), std::move(y));
        push([this, x, o] {
            const auto& xv = val(x);
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (size_t i = 0; i < og.size(); ++i)
                if (xv[i] > T(0)) xg[i] += og[i];
        });
        return o;
    }

    Var sigmoid(Var x) {
        const auto& xv = val(x);
        std::vector<T> y(xv.size());
        for (size_t i = 0; i < y.size(); ++i) {
            const T v = xv[i];
            y[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                             : std::exp(v) / (T(1) + std::exp(v));
        }
        Var o = make_slot(shape(x), std::move(y));
        push([this, x, o] {
            const auto& ov = val(o);
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (size_t i = 0; i < og.size(); ++i) xg[i] += og[i] * ov[i] * (T(1) - ov[i]);
        });
        return o;
    }

    Var mul(Var a, Var b) {
        require_same_shape(shape(a), shape(b), "mul");
        const auto& av = val(a);
        const auto& bv = val(b);
        std::vector<T> y(av.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
        Var o = make_slot(shape(a), std::move(y));
        push([this, a, b, o] {
            const auto& av = val(a);
            const auto& bv = val(b);
            const auto& og = grad(o);
            auto& ag = grad(a);
            auto& bg = grad(b);
            for (size_t i = 0; i < og.size(); ++i) {
                ag[i] += og[i] * bv[i];
                bg[i] += og[i] * av[i];
            }
        });
        return o;
    }

    Var add(Var a, Var b) {
        require_same_shape(shape(a), shape(b), "add");
        const auto& av = val(a);
        const auto& bv = val(b);
        std::vector<T> y(av.size());
        for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
        Var o = make_slot(shape(a), std::move(y));
        push([this, a, b, o] {
            const auto& og = grad(o);
            auto& ag = grad(a);
            auto& bg = grad(b);
            for (size_t i = 0; i < og.size(); ++i) {
                ag[i] += og[i];
                bg[i] += og[i];
            }
        });
        return o;
    }

    // y = sum_k w_k * x_k over scalar vars (loss aggregation).
    Var weighted_sum(const std::vector<std::pair<Var, T>>& terms) {
        if (terms.empty()) throw ContractError("weighted_sum: no terms");
        T acc = T(0);
        for (auto& [v, w] : terms) {
            if (shape(v).count() != 1) throw ContractError("weighted_sum: non-scalar term");
            acc += w * val(v)[0];
        }
        Var o = make_slot(Shape4{1, 1, 1, 1}, std::vector<T>{acc});
        auto terms_copy = terms;
        push([this, terms_copy, o] {
            const T og = grad(o)[0];
            for (auto& [v, w] : terms_copy) grad(v)[0] += w * og;
        });
        return o;
    }

    // Fixed-weight full contraction to a scalar: sum_i w_i * x_i.
    Var dot(Var x, std::vector<T> w) {
        const auto& xv = val(x);
        if (w.size() != xv.size()) throw ContractError("dot: weight/value size mismatch");
        T acc = T(0);
        for (size_t i = 0; i < xv.size(); ++i) acc += w[i] * xv[i];
        Var o = make_slot(Shape4{1, 1, 1, 1}, std::vector<T>{acc});
        push([this, x, o, w = std::move(w)] {
            const T og = grad(o)[0];
            auto& xg = grad(x);
            for (size_t i = 0; i < w.size(); ++i) xg[i] += og * w[i];
        });
        return o;
    }

    // Gradient reversal: identity forward, -lambda scaling backward.
    Var grl(Var x, T lambda) {
        Var o = make_slot(shape(x), val(x));
        push([this, x, o, lambda] {
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (size_t i = 0; i < og.size(); ++i) xg[i] += -lambda * og[i];
        });
        return o;
    }

    // -- shape ops -----------------------------------------------------------

    Var concat_channels(Var a, Var b) {
        const Shape4 sa = shape(a), sb = shape(b);
        if (sa.b != sb.b || sa.h != sb.h || sa.w != sb.w)
            throw ContractError("concat_channels: incompatible shapes");
        const Shape4 so{sa.b, sa.c + sb.c, sa.h, sa.w};
        std::vector<T> y(so.count());
        const size_t plane = static_cast<size_t>(sa.h) * sa.w;
        const auto& av = val(a);
        const auto& bv = val(b);
        for (int n = 0; n < sa.b; ++n) {
            std::copy(av.begin() + n * sa.c * plane, av.begin() + (n + 1) * sa.c * plane,
                      y.begin() + n * so.c * plane);
            std::copy(bv.begin() + n * sb.c * plane, bv.begin() + (n + 1) * sb.c * plane,
                      y.begin() + n * so.c * plane + sa.c * plane);
        }
        Var o = make_slot(so, std::move(y));
        push([this, a, b, o, sa, sb, so, plane] {
            const auto& og = grad(o);
            auto& ag = grad(a);
            auto& bg = grad(b);
            for (int n = 0; n < sa.b; ++n) {
                for (size_t i = 0; i < sa.c * plane; ++i)
                    ag[n * sa.c * plane + i] += og[n * so.c * plane + i];
                for (size_t i = 0; i < sb.c * plane; ++i)
                    bg[n * sb.c * plane + i] += og[n * so.c * plane + sa.c * plane + i];
            }
        });
        return o;
    }

    // z (B,1,H,W) broadcast-multiplied over channels of x (B,C,H,W).
    Var broadcast_mul(Var z, Var x) {
        const Shape4 sz = shape(z), sx = shape(x);
        if (sz.b != sx.b || sz.c != 1 || sz.h != sx.h || sz.w != sx.w)
            throw ContractError("broadcast_mul: z must be B,1,H,W matching x");
        const size_t plane = static_cast<size_t>(sx.h) * sx.w;
        const auto& zv = val(z);
        const auto& xv = val(x);
        std::vector<T> y(sx.count());
        for (int n = 0; n < sx.b; ++n)
            for (int c = 0; c < sx.c; ++c)
                for (size_t i = 0; i < plane; ++i)
                    y[(n * sx.c + c) * plane + i] = zv[n * plane + i] * xv[(n * sx.c + c) * plane + i];
        Var o = make_slot(sx, std::move(y));
        push([this, z, x, o, sx, plane] {
            const auto& zv = val(z);
            const auto& xv = val(x);
            const auto& og = grad(o);
            auto& zg = grad(z);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n)
                for (int c = 0; c < sx.c; ++c)
                    for (size_t i = 0; i < plane; ++i) {
                        const size_t xi = (n * sx.c + c) * plane + i;
                        zg[n * plane + i] += og[xi] * xv[xi];
                        xg[xi] += og[xi] * zv[n * plane + i];
                    }
        });
        return o;
    }

    // (B,C,H,W) -> (B,1,H,W), mean across channels.
    Var channel_mean(Var x) {
        const Shape4 sx = shape(x);
        const Shape4 so{sx.b, 1, sx.h, sx.w};
        const size_t plane = static_cast<size_t>(sx.h) * sx.w;
        const auto& xv = val(x);
        std::vector<T> y(so.count(), T(0));
        for (int n = 0; n < sx.b; ++n)
            for (int c = 0; c < sx.c; ++c)
                for (size_t i = 0; i < plane; ++i)
                    y[n * plane + i] += xv[(n * sx.c + c) * plane + i];
        const T inv = T(1) / static_cast<T>(sx.c);
        for (T& v : y) v *= inv;
        Var o = make_slot(so, std::move(y));
        push([this, x, o, sx, plane, inv] {
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n)
                for (int c = 0; c < sx.c; ++c)
                    for (size_t i = 0; i < plane; ++i)
                        xg[(n * sx.c + c) * plane + i] += og[n * plane + i] * inv;
        });
        return o;
    }

    // (B,C,H,W) -> (B,C,1,1), spatial mean.
    Var global_avg_pool(Var x) {
        const Shape4 sx = shape(x);
        const Shape4 so{sx.b, sx.c, 1, 1};
        const size_t plane = static_cast<size_t>(sx.h) * sx.w;
        const T inv = T(1) / static_cast<T>(plane);
        const auto& xv = val(x);
        std::vector<T> y(so.count(), T(0));
        for (int n = 0; n < sx.b; ++n)
            for (int c = 0; c < sx.c; ++c) {
                T acc = T(0);
                for (size_t i = 0; i < plane; ++i) acc += xv[(n * sx.c + c) * plane + i];
                y[n * sx.c + c] = acc * inv;
            }
        Var o = make_slot(so, std::move(y));
        push([this, x, o, sx, plane, inv] {
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n)
                for (int c = 0; c < sx.c; ++c)
                    for (size_t i = 0; i < plane; ++i)
                        xg[(n * sx.c + c) * plane + i] += og[n * sx.c + c] * inv;
        });
        return o;
    }

    // -- conv / linear / batchnorm -------------------------------------------

    // x (B,Cin,H,W) * w (Cout,Cin,Kh,Kw) + b (1,Cout,1,1); zero padding.
    Var conv2d(Var x, Var w, Var b, int stride, int pad) {
        const Shape4 sx = shape(x), sw = shape(w), sb = shape(b);
        if (sw.c != sx.c) throw ConfigurationError("conv2d: channel mismatch");
        if (sb.c != sw.b || sb.count() != static_cast<size_t>(sw.b))
            throw ConfigurationError("conv2d: bias shape mismatch");
        if (sw.h % 2 == 0 || sw.w % 2 == 0) throw ConfigurationError("conv2d: kernel must be odd");
        const int ho = (sx.h + 2 * pad - sw.h) / stride + 1;
        const int wo = (sx.w + 2 * pad - sw.w) / stride + 1;
        if (ho <= 0 || wo <= 0) throw ConfigurationError("conv2d: output collapses to zero size");
        const Shape4 so{sx.b, sw.b, ho, wo};

        std::vector<T> y(so.count());
        const int patch = sx.c * sw.h * sw.w;
        std::vector<T> col(static_cast<size_t>(patch) * ho * wo);
        using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const Mat> wm(val(w).data(), sw.b, patch);
        for (int n = 0; n < sx.b; ++n) {
            im2col(val(x).data() + static_cast<size_t>(n) * sx.c * sx.h * sx.w, sx, sw.h, sw.w,
                   stride, pad, ho, wo, col.data());
            Eigen::Map<const Mat> cm(col.data(), patch, static_cast<size_t>(ho) * wo);
            Eigen::Map<Mat> ym(y.data() + static_cast<size_t>(n) * sw.b * ho * wo, sw.b,
                               static_cast<size_t>(ho) * wo);
            ym.noalias() = wm * cm;
            for (int oc = 0; oc < sw.b; ++oc) ym.row(oc).array() += val(b)[oc];
        }
        Var o = make_slot(so, std::move(y));
        push([this, x, w, b, o, sx, sw, so, stride, pad, patch] {
            const int ho = so.h, wo = so.w;
            using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            std::vector<T> col(static_cast<size_t>(patch) * ho * wo);
            std::vector<T> dcol(static_cast<size_t>(patch) * ho * wo);
            Eigen::Map<const Mat> wm(val(w).data(), sw.b, patch);
            Eigen::Map<Mat> wg(grad(w).data(), sw.b, patch);
            auto& bg = grad(b);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n) {
                im2col(val(x).data() + static_cast<size_t>(n) * sx.c * sx.h * sx.w, sx, sw.h,
                       sw.w, stride, pad, ho, wo, col.data());
                Eigen::Map<const Mat> cm(col.data(), patch, static_cast<size_t>(ho) * wo);
                Eigen::Map<const Mat> gm(grad(o).data() + static_cast<size_t>(n) * sw.b * ho * wo,
                                         sw.b, static_cast<size_t>(ho) * wo);
                wg.noalias() += gm * cm.transpose();
                for (int oc = 0; oc < sw.b; ++oc) bg[oc] += gm.row(oc).sum();
                Eigen::Map<Mat> dm(dcol.data(), patch, static_cast<size_t>(ho) * wo);
                dm.noalias() = wm.transpose() * gm;
                col2im(dcol.data(), sx, sw.h, sw.w, stride, pad, ho, wo,
                       xg.data() + static_cast<size_t>(n) * sx.c * sx.h * sx.w);
            }
        });
        return o;
    }

    // x (B,F) as (B,F,1,1); w (O,F,1,1); b (1,O,1,1) -> (B,O,1,1).
    Var linear(Var x, Var w, Var b) {
        const Shape4 sx = shape(x), sw = shape(w), sb = shape(b);
        if (sx.h != 1 || sx.w != 1 || sw.h != 1 || sw.w != 1)
            throw ConfigurationError("linear: expects flattened inputs");
        if (sw.c != sx.c) throw ConfigurationError("linear: feature size mismatch");
        if (sb.c != sw.b) throw ConfigurationError("linear: bias mismatch");
        const Shape4 so{sx.b, sw.b, 1, 1};
        using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const Mat> xm(val(x).data(), sx.b, sx.c);
        Eigen::Map<const Mat> wm(val(w).data(), sw.b, sw.c);
        std::vector<T> y(so.count());
        Eigen::Map<Mat> ym(y.data(), sx.b, sw.b);
        ym.noalias() = xm * wm.transpose();
        for (int n = 0; n < sx.b; ++n)
            for (int oc = 0; oc < sw.b; ++oc) y[n * sw.b + oc] += val(b)[oc];
        Var o = make_slot(so, std::move(y));
        push([this, x, w, b, o, sx, sw] {
            using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<const Mat> xm(val(x).data(), sx.b, sx.c);
            Eigen::Map<const Mat> wm(val(w).data(), sw.b, sw.c);
            Eigen::Map<const Mat> gm(grad(o).data(), sx.b, sw.b);
            Eigen::Map<Mat> xg(grad(x).data(), sx.b, sx.c);
            Eigen::Map<Mat> wg(grad(w).data(), sw.b, sw.c);
            xg.noalias() += gm * wm;
            wg.noalias() += gm.transpose() * xm;
            auto& bg = grad(b);
            for (int oc = 0; oc < sw.b; ++oc) bg[oc] += gm.col(oc).sum();
        });
        return o;
    }

    // Batch normalization over (B,H,W) per channel. Training mode uses batch
    // statistics (biased variance) and updates the running buffers in place;
    // eval mode normalizes with the running buffers.
    Var batchnorm(Var x, Var gamma, Var beta, std::vector<T>& run_mean, std::vector<T>& run_var,
                  bool training, double momentum = 0.1, double eps = 1e-5) {
        const Shape4 sx = shape(x);
        if (shape(gamma).c != sx.c || shape(beta).c != sx.c ||
            run_mean.size() != static_cast<size_t>(sx.c) ||
            run_var.size() != static_cast<size_t>(sx.c))
            throw ConfigurationError("batchnorm: channel mismatch");
        const size_t plane = static_cast<size_t>(sx.h) * sx.w;
        const size_t per_ch = static_cast<size_t>(sx.b) * plane;
        const auto& xv = val(x);

        std::vector<T> mean(sx.c), invstd(sx.c);
        if (training) {
            for (int c = 0; c < sx.c; ++c) {
                T m = T(0);
                for (int n = 0; n < sx.b; ++n)
                    for (size_t i = 0; i < plane; ++i) m += xv[(n * sx.c + c) * plane + i];
                m /= static_cast<T>(per_ch);
                T v = T(0);
                for (int n = 0; n < sx.b; ++n)
                    for (size_t i = 0; i < plane; ++i) {
                        const T d = xv[(n * sx.c + c) * plane + i] - m;
                        v += d * d;
                    }
                v /= static_cast<T>(per_ch);
                mean[c] = m;
                invstd[c] = T(1) / std::sqrt(v + static_cast<T>(eps));
                run_mean[c] = static_cast<T>((1.0 - momentum) * run_mean[c] + momentum * m);
                run_var[c] = static_cast<T>((1.0 - momentum) * run_var[c] + momentum * v);
            }
        } else {
            for (int c = 0; c < sx.c; ++c) {
                mean[c] = run_mean[c];
                invstd[c] = T(1) / std::sqrt(run_var[c] + static_cast<T>(eps));
            }
        }

        std::vector<T> y(sx.count());
        const auto& gv = val(gamma);
        const auto& bv = val(beta);
        for (int n = 0; n < sx.b; ++n)
            for (int c = 0; c < sx.c; ++c)
                for (size_t i = 0; i < plane; ++i) {
                    const size_t idx = (n * sx.c + c) * plane + i;
                    y[idx] = gv[c] * (xv[idx] - mean[c]) * invstd[c] + bv[c];
                }
        Var o = make_slot(sx, std::move(y));
        push([this, x, gamma, beta, o, sx, plane, per_ch, mean, invstd, training] {
            const auto& xv = val(x);
            const auto& og = grad(o);
            const auto& gv = val(gamma);
            auto& xg = grad(x);
            auto& gg = grad(gamma);
            auto& bg = grad(beta);
            for (int c = 0; c < sx.c; ++c) {
                T sum_dy = T(0), sum_dy_xhat = T(0);
                for (int n = 0; n < sx.b; ++n)
                    for (size_t i = 0; i < plane; ++i) {
                        const size_t idx = (n * sx.c + c) * plane + i;
                        const T xhat = (xv[idx] - mean[c]) * invstd[c];
                        sum_dy += og[idx];
                        sum_dy_xhat += og[idx] * xhat;
                    }
                gg[c] += sum_dy_xhat;
                bg[c] += sum_dy;
                const T k = gv[c] * invstd[c];
                if (training) {
                    const T inv_n = T(1) / static_cast<T>(per_ch);
                    for (int n = 0; n < sx.b; ++n)
                        for (size_t i = 0; i < plane; ++i) {
                            const size_t idx = (n * sx.c + c) * plane + i;
                            const T xhat = (xv[idx] - mean[c]) * invstd[c];
                            xg[idx] += k * (og[idx] - inv_n * sum_dy - inv_n * xhat * sum_dy_xhat);
                        }
                } else {
                    for (int n = 0; n < sx.b; ++n)
                        for (size_t i = 0; i < plane; ++i) {
                            const size_t idx = (n * sx.c + c) * plane + i;
                            xg[idx] += k * og[idx];
                        }
                }
            }
        });
        return o;
    }

    // -- losses --------------------------------------------------------------

    // Row-wise numerically stable log-softmax over (B,K,1,1).
    Var log_softmax(Var x) {
        const Shape4 sx = shape(x);
        if (sx.h != 1 || sx.w != 1) throw ConfigurationError("log_softmax: expects (B,K)");
        const auto& xv = val(x);
        std::vector<T> y(xv.size());
        for (int n = 0; n < sx.b; ++n) {
            const T* row = xv.data() + static_cast<size_t>(n) * sx.c;
            T mx = row[0];
            for (int k = 1; k < sx.c; ++k) mx = std::max(mx, row[k]);
            T lse = T(0);
            for (int k = 0; k < sx.c; ++k) lse += std::exp(row[k] - mx);
            lse = mx + std::log(lse);
            for (int k = 0; k < sx.c; ++k) y[n * sx.c + k] = row[k] - lse;
        }
        Var o = make_slot(sx, std::move(y));
        push([this, x, o, sx] {
            const auto& ov = val(o);
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n) {
                T gsum = T(0);
                for (int k = 0; k < sx.c; ++k) gsum += og[n * sx.c + k];
                for (int k = 0; k < sx.c; ++k)
                    xg[n * sx.c + k] += og[n * sx.c + k] - std::exp(ov[n * sx.c + k]) * gsum;
            }
        });
        return o;
    }

    // Mean over batch of -logp[label]; logp from log_softmax.
    Var nll(Var logp, const std::vector<int>& labels) {
        const Shape4 sx = shape(logp);
        if (static_cast<int>(labels.size()) != sx.b) throw ContractError("nll: label count");
        for (int lab : labels)
            if (lab < 0 || lab >= sx.c) throw ArgumentError("nll: label out of range");
        const auto& lv = val(logp);
        T acc = T(0);
        for (int n = 0; n < sx.b; ++n) acc -= lv[n * sx.c + labels[n]];
        acc /= static_cast<T>(sx.b);
        Var o = make_slot(Shape4{1, 1, 1, 1}, std::vector<T>{acc});
        push([this, logp, o, labels, sx] {
            const T og = grad(o)[0];
            auto& lg = grad(logp);
            const T inv = T(1) / static_cast<T>(sx.b);
            for (int n = 0; n < sx.b; ++n) lg[n * sx.c + labels[n]] -= og * inv;
        });
        return o;
    }

    // Per-sample min-max normalization to [0,1] over C*H*W. A flat sample
    // (max-min below tol) normalizes to all-zeros and is flagged. The backward
    // pass routes the extra min/max terms to the first arg-extremal element,
    // which is the exact subgradient of the forward value actually computed.
    Var minmax_normalize(Var x, std::vector<uint8_t>* degenerate_out = nullptr, double tol = 1e-12) {
        const Shape4 sx = shape(x);
        const size_t per = sx.count() / sx.b;
        const auto& xv = val(x);
        std::vector<T> y(xv.size(), T(0));
        std::vector<size_t> imin(sx.b), imax(sx.b);
        std::vector<uint8_t> degen(sx.b, 0);
        std::vector<T> inv_range(sx.b, T(0));
        for (int n = 0; n < sx.b; ++n) {
            const T* s = xv.data() + static_cast<size_t>(n) * per;
            size_t mi = 0, ma = 0;
            for (size_t i = 1; i < per; ++i) {
                if (s[i] < s[mi]) mi = i;
                if (s[i] > s[ma]) ma = i;
            }
            imin[n] = mi;
            imax[n] = ma;
            const T range = s[ma] - s[mi];
            if (static_cast<double>(range) < tol) {
                degen[n] = 1;
                continue;
            }
            inv_range[n] = T(1) / range;
            T* d = y.data() + static_cast<size_t>(n) * per;
            for (size_t i = 0; i < per; ++i) d[i] = (s[i] - s[mi]) * inv_range[n];
        }
        if (degenerate_out) *degenerate_out = degen;
        Var o = make_slot(sx, std::move(y));
        push([this, x, o, sx, per, imin, imax, degen, inv_range] {
            const auto& ov = val(o);
            const auto& og = grad(o);
            auto& xg = grad(x);
            for (int n = 0; n < sx.b; ++n) {
                if (degen[n]) continue;
                const size_t base = static_cast<size_t>(n) * per;
                T dmin = T(0), dmax = T(0);
                for (size_t i = 0; i < per; ++i) {
                    const T g = og[base + i];
                    if (g == T(0)) continue;
                    xg[base + i] += g * inv_range[n];
                    dmin += g * (ov[base + i] - T(1)) * inv_range[n];
                    dmax += g * (-ov[base + i]) * inv_range[n];
                }
                xg[base + imin[n]] += dmin;
                xg[base + imax[n]] += dmax;
            }
        });
        return o;
    }

    // Positional supervision loss: -(1/(B*Ns)) sum h_i * log(sigmoid(f_i)),
    // Ns = C*H*W. log(sigmoid) computed in softplus form and clamped at
    // log(1e-12); inside the clamp the f-gradient is zero.
    Var mask_xent(Var f, Var h) {
        require_same_shape(shape(f), shape(h), "mask_xent");
        const Shape4 s = shape(f);
        const size_t ns = s.count() / s.b;
        const auto& fv = val(f);
        const auto& hv = val(h);
        const T floor_log = static_cast<T>(std::log(1e-12));
        std::vector<T> ls(fv.size());
        T acc = T(0);
        for (size_t i = 0; i < fv.size(); ++i) {
            const T z = -fv[i];
            const T sp = z > T(20) ? z : std::log1p(std::exp(z));  // softplus(-f)
            ls[i] = std::max(-sp, floor_log);
            acc -= hv[i] * ls[i];
        }
        acc /= static_cast<T>(s.b) * static_cast<T>(ns);
        Var o = make_slot(Shape4{1, 1, 1, 1}, std::vector<T>{acc});
        push([this, f, h, o, s, ns, ls, floor_log] {
            const T og = grad(o)[0];
            const auto& fv = val(f);
            auto& fg = grad(f);
            auto& hg = grad(h);
            const auto& hv = val(h);
            const T scale = og / (static_cast<T>(s.b) * static_cast<T>(ns));
            for (size_t i = 0; i < fv.size(); ++i) {
                hg[i] += -scale * ls[i];
                if (ls[i] > floor_log) {
                    // d/df log(sigmoid(f)) = sigmoid(-f)
                    const T z = fv[i];
                    const T sig_neg = z >= T(0) ? std::exp(-z) / (T(1) + std::exp(-z))
                                                : T(1) / (T(1) + std::exp(z));
                    fg[i] += -scale * hv[i] * sig_neg;
                }
            }
        });
        return o;
    }

    // -- engine --------------------------------------------------------------

    void backward(Var loss) {
        if (shape(loss).count() != 1) throw ContractError("backward: loss must be scalar");
        grad(loss)[0] = T(1);
        for (auto it = backward_ops_.rbegin(); it != backward_ops_.rend(); ++it) (*it)();
    }

private:
    struct Slot {
        Shape4 shape;
        std::vector<T> own_val, own_grad;
        std::vector<T>* vptr = nullptr;
        std::vector<T>* gptr = nullptr;
    };

    Var make_slot(Shape4 shape, std::vector<T> data) {
        Slot s;
        s.shape = shape;
        s.own_val = std::move(data);
        s.own_grad.assign(shape.count(), T(0));
        slots_.push_back(std::move(s));
        return static_cast<Var>(slots_.size()) - 1;
    }

    void push(std::function<void()> fn) { backward_ops_.push_back(std::move(fn)); }

    static void im2col(const T* src, const Shape4& sx, int kh, int kw, int stride, int pad,
                       int ho, int wo, T* col) {
        // col is (Cin*kh*kw) x (ho*wo), row-major
        const size_t ncol = static_cast<size_t>(ho) * wo;
        size_t r = 0;
        for (int c = 0; c < sx.c; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx, ++r) {
                    T* dst = col + r * ncol;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= sx.h) {
                            for (int ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = T(0);
                            continue;
                        }
                        const T* srow = src + (static_cast<size_t>(c) * sx.h + iy) * sx.w;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride - pad + kx;
                            dst[oy * wo + ox] = (ix < 0 || ix >= sx.w) ? T(0) : srow[ix];
                        }
                    }
                }
            }
        }
    }

    static void col2im(const T* col, const Shape4& sx, int kh, int kw, int stride, int pad,
                       int ho, int wo, T* dst) {
        const size_t ncol = static_cast<size_t>(ho) * wo;
        size_t r = 0;
        for (int c = 0; c < sx.c; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx, ++r) {
                    const T* srow = col + r * ncol;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= sx.h) continue;
                        T* drow = dst + (static_cast<size_t>(c) * sx.h + iy) * sx.w;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride - pad + kx;
                            if (ix >= 0 && ix < sx.w) drow[ix] += srow[oy * wo + ox];
                        }
                    }
                }
            }
        }
    }

    std::vector<Slot> slots_;
    std::vector<std::function<void()>> backward_ops_;
};

}  // namespace sarlab::nn
