#include "scdc/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace scdc::nn {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

ConstMatMap cmap(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return ConstMatMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatMap map(std::span<double> v, std::size_t rows, std::size_t cols) {
    return MatMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()) + " differ");
    }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
    if (a.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(a.shape()));
    }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        for (std::size_t p = 0; p < 2; ++p) {
            Node& in = parent(self, p);
            if (!in.requires_grad) continue;
            auto g = in.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        for (std::size_t p = 0; p < 2; ++p) {
            Node& in = parent(self, p);
            if (!in.requires_grad) continue;
            const double sign = p == 0 ? 1.0 : -1.0;
            auto g = in.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        Node& x = parent(self, 0);
        Node& y = parent(self, 1);
        if (x.requires_grad) {
            auto g = x.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y.value[i];
        }
        if (y.requires_grad) {
            auto g = y.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x.value[i];
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
    return make_result(a.shape(), std::move(out), {a}, [s](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
    });
}

Tensor exp(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a[i]);
    return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
    });
}

Tensor log_floor(const Tensor& a, double floor) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(std::max(a[i], floor));
    return make_result(a.shape(), std::move(out), {a}, [floor](Node& self) {
        Node& in = parent(self, 0);
        auto g = in.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (in.value[i] > floor) g[i] += self.grad[i] / in.value[i];
        }
    });
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], 0.0);
    return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
        Node& in = parent(self, 0);
        auto g = in.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (in.value[i] > 0.0) g[i] += self.grad[i];
        }
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    return make_result({}, {acc}, {a}, [](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (double& v : g) v += self.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean of empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_rows(const Tensor& a) {
    require_rank(a, 2, "sum_rows");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[i] += a[i * n + j];
    }
    return make_result({m}, std::move(out), {a}, [m, n](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i];
        }
    });
}

Tensor sum_cols(const Tensor& a) {
    require_rank(a, 2, "sum_cols");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j];
    }
    return make_result({n}, std::move(out), {a}, [m, n](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j];
        }
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const auto m = a.dim(0);
    const auto k = a.dim(1);
    const auto n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
    }
    std::vector<double> out(m * n);
    map(out, m, n).noalias() = cmap(a.node()->value, m, k) * cmap(b.node()->value, k, n);
    return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
        Node& x = parent(self, 0);
        Node& y = parent(self, 1);
        const auto g = cmap(self.grad, m, n);
        if (x.requires_grad) map(x.ensure_grad(), m, k).noalias() += g * cmap(y.value, k, n).transpose();
        if (y.requires_grad) map(y.ensure_grad(), k, n).noalias() += cmap(x.value, m, k).transpose() * g;
    });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
    }
    return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
        }
    });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "concat_rows");
    require_rank(b, 2, "concat_rows");
    if (a.dim(1) != b.dim(1)) {
        throw ShapeError("concat_rows: " + to_string(a.shape()) + " and " + to_string(b.shape()));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    const auto split = a.size();
    return make_result({a.dim(0) + b.dim(0), a.dim(1)}, std::move(out), {a, b},
                       [split](Node& self) {
                           Node& x = parent(self, 0);
                           Node& y = parent(self, 1);
                           if (x.requires_grad) {
                               auto g = x.ensure_grad();
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                           }
                           if (y.requires_grad) {
                               auto g = y.ensure_grad();
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[split + i];
                           }
                       });
}

Tensor normalize_rows(const Tensor& a, double eps) {
    require_rank(a, 2, "normalize_rows");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(m * n);
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j) ss += a[i * n + j] * a[i * n + j];
        norms[i] = std::sqrt(ss);
        const double d = std::max(norms[i], eps);
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i * n + j] / d;
    }
    return make_result({m, n}, std::move(out), {a}, [m, n, eps, norms = std::move(norms)](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            const double* y = self.value.data() + i * n;
            const double* gy = self.grad.data() + i * n;
            if (norms[i] > eps) {
                // d(x/|x|) = (g - y (y.g)) / |x|
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += y[j] * gy[j];
                for (std::size_t j = 0; j < n; ++j) g[i * n + j] += (gy[j] - y[j] * dot) / norms[i];
            } else {
                for (std::size_t j = 0; j < n; ++j) g[i * n + j] += gy[j] / eps;
            }
        }
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (element_count(shape) != a.size()) {
        throw ShapeError("reshape: " + to_string(a.shape()) + " -> " + to_string(shape));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    return make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

Tensor logsumexp_rows(const Tensor& a, const Tensor& mask) {
    require_rank(a, 2, "logsumexp_rows");
    require_same_shape(a, mask, "logsumexp_rows");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(m);
    std::vector<double> weights(m * n, 0.0);  // softmax over the selected entries
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (mask[i * n + j] != 0.0) mx = std::max(mx, a[i * n + j]);
        }
        if (mx == -std::numeric_limits<double>::infinity()) {
            throw std::invalid_argument("logsumexp_rows: row " + std::to_string(i) +
                                        " selects no entries");
        }
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask[i * n + j] != 0.0) {
                weights[i * n + j] = std::exp(a[i * n + j] - mx);
                z += weights[i * n + j];
            }
        }
        out[i] = mx + std::log(z);
        for (std::size_t j = 0; j < n; ++j) weights[i * n + j] /= z;
    }
    return make_result({m}, std::move(out), {a, mask}, [m, n, weights = std::move(weights)](Node& self) {
        Node& in = parent(self, 0);
        if (!in.requires_grad) return;
        auto g = in.ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i] * weights[i * n + j];
        }
    });
}

Tensor softmax_rows(const Tensor& a) {
    require_rank(a, 2, "softmax_rows");
    const auto m = a.dim(0);
    const auto n = a.dim(1);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, a[i * n + j]);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = std::exp(a[i * n + j] - mx);
            z += out[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
    }
    return make_result({m, n}, std::move(out), {a}, [m, n](Node& self) {
        auto g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            const double* y = self.value.data() + i * n;
            const double* gy = self.grad.data() + i * n;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y[j] * gy[j];
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += y[j] * (gy[j] - dot);
        }
    });
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    require_rank(input, 2, "linear");
    require_rank(weight, 2, "linear");
    require_rank(bias, 1, "linear");
    const auto b = input.dim(0);
    const auto d = input.dim(1);
    const auto e = weight.dim(1);
    if (weight.dim(0) != d || bias.dim(0) != e) {
        throw ShapeError("linear: input " + to_string(input.shape()) + ", weight " +
                         to_string(weight.shape()) + ", bias " + to_string(bias.shape()));
    }
    std::vector<double> out(b * e);
    auto o = map(out, b, e);
    o.noalias() = cmap(input.node()->value, b, d) * cmap(weight.node()->value, d, e);
    const auto bias_row = Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(),
                                                                static_cast<Eigen::Index>(e));
    o.rowwise() += bias_row;
    return make_result({b, e}, std::move(out), {input, weight, bias}, [b, d, e](Node& self) {
        Node& x = parent(self, 0);
        Node& w = parent(self, 1);
        Node& bs = parent(self, 2);
        const auto g = cmap(self.grad, b, e);
        if (x.requires_grad) map(x.ensure_grad(), b, d).noalias() += g * cmap(w.value, d, e).transpose();
        if (w.requires_grad) map(w.ensure_grad(), d, e).noalias() += cmap(x.value, b, d).transpose() * g;
        // Plain loops: Eigen's vectorized reductions peel by buffer address,
        // which would make the rounding depend on where malloc placed the data.
        if (bs.requires_grad) {
            auto gb = bs.ensure_grad();
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < e; ++j) gb[j] += self.grad[i * e + j];
        }
    });
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
    require_rank(input, 3, "conv1d");
    require_rank(weight, 3, "conv1d");
    require_rank(bias, 1, "conv1d");
    const auto batch = input.dim(0);
    const auto cin = input.dim(1);
    const auto len = input.dim(2);
    const auto cout = weight.dim(0);
    const auto ksize = weight.dim(2);
    if (weight.dim(1) != cin || bias.dim(0) != cout || stride == 0) {
        throw ShapeError("conv1d: input " + to_string(input.shape()) + ", weight " +
                         to_string(weight.shape()) + ", bias " + to_string(bias.shape()));
    }
    if (len + 2 * padding < ksize) throw ShapeError("conv1d: kernel longer than padded input");
    const auto out_len = (len + 2 * padding - ksize) / stride + 1;
    const auto ck = cin * ksize;
    const auto cols_n = batch * out_len;

    // im2col: cols[(c * K + k), b * L' + t] = x[b, c, t * stride + k - padding]
    auto cols = std::make_shared<std::vector<double>>(ck * cols_n, 0.0);
    const auto& x = input.node()->value;
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t k = 0; k < ksize; ++k) {
            double* row = cols->data() + (c * ksize + k) * cols_n;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* src = x.data() + (b * cin + c) * len;
                double* dst = row + b * out_len;
                for (std::size_t t = 0; t < out_len; ++t) {
                    const auto pos = static_cast<long>(t * stride + k) - static_cast<long>(padding);
                    if (pos >= 0 && pos < static_cast<long>(len)) dst[t] = src[pos];
                }
            }
        }
    }

    std::vector<double> prod(cout * cols_n);
    map(prod, cout, cols_n).noalias() = cmap(weight.node()->value, cout, ck) * cmap(*cols, ck, cols_n);
    std::vector<double> out(batch * cout * out_len);
    const auto bias_v = bias.values();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t co = 0; co < cout; ++co) {
            const double* src = prod.data() + co * cols_n + b * out_len;
            double* dst = out.data() + (b * cout + co) * out_len;
            for (std::size_t t = 0; t < out_len; ++t) dst[t] = src[t] + bias_v[co];
        }
    }

    return make_result(
        {batch, cout, out_len}, std::move(out), {input, weight, bias},
        [=, cols = std::move(cols)](Node& self) {
            Node& xin = parent(self, 0);
            Node& w = parent(self, 1);
            Node& bs = parent(self, 2);
            std::vector<double> g2(cout * cols_n);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t co = 0; co < cout; ++co) {
                    const double* src = self.grad.data() + (b * cout + co) * out_len;
                    std::copy(src, src + out_len, g2.data() + co * cols_n + b * out_len);
                }
            }
            const auto g = cmap(g2, cout, cols_n);
            if (w.requires_grad) {
                map(w.ensure_grad(), cout, ck).noalias() += g * cmap(*cols, ck, cols_n).transpose();
            }
            if (bs.requires_grad) {
                auto gb = bs.ensure_grad();
                for (std::size_t co = 0; co < cout; ++co) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < cols_n; ++j) acc += g2[co * cols_n + j];
                    gb[co] += acc;
                }
            }
            if (xin.requires_grad) {
                std::vector<double> dcols(ck * cols_n);
                map(dcols, ck, cols_n).noalias() = cmap(w.value, cout, ck).transpose() * g;
                auto gx = xin.ensure_grad();
                for (std::size_t c = 0; c < cin; ++c) {
                    for (std::size_t k = 0; k < ksize; ++k) {
                        const double* row = dcols.data() + (c * ksize + k) * cols_n;
                        for (std::size_t b = 0; b < batch; ++b) {
                            double* dst = gx.data() + (b * cin + c) * len;
                            const double* src = row + b * out_len;
                            for (std::size_t t = 0; t < out_len; ++t) {
                                const auto pos =
                                    static_cast<long>(t * stride + k) - static_cast<long>(padding);
                                if (pos >= 0 && pos < static_cast<long>(len)) dst[pos] += src[t];
                            }
                        }
                    }
                }
            }
        });
}

Tensor batchnorm1d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState state, Mode mode) {
    require_rank(input, 3, "batchnorm1d");
    const auto batch = input.dim(0);
    const auto ch = input.dim(1);
    const auto len = input.dim(2);
    if (gamma.size() != ch || beta.size() != ch || state.running_mean.size() != ch ||
        state.running_var.size() != ch) {
        throw ShapeError("batchnorm1d: parameter sizes do not match " + std::to_string(ch) +
                         " channels");
    }
    const auto n = batch * len;
    if (mode == Mode::train && n < 2) {
        throw ShapeError("batchnorm1d: train mode needs at least two values per channel");
    }
    const auto& x = input.node()->value;
    std::vector<double> mean_c(ch), invstd(ch);
    for (std::size_t c = 0; c < ch; ++c) {
        if (mode == Mode::train) {
            double s = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* row = x.data() + (b * ch + c) * len;
                for (std::size_t t = 0; t < len; ++t) s += row[t];
            }
            const double mu = s / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* row = x.data() + (b * ch + c) * len;
                for (std::size_t t = 0; t < len; ++t) ss += (row[t] - mu) * (row[t] - mu);
            }
            const double var = ss / static_cast<double>(n);
            mean_c[c] = mu;
            invstd[c] = 1.0 / std::sqrt(var + state.eps);
            const double unbiased = ss / static_cast<double>(n - 1);
            state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mu;
            state.running_var[c] =
                (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
        } else {
            mean_c[c] = state.running_mean[c];
            invstd[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
        }
    }
    std::vector<double> xhat(x.size());
    std::vector<double> out(x.size());
    const auto gm = gamma.values();
    const auto bt = beta.values();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t off = (b * ch + c) * len;
            for (std::size_t t = 0; t < len; ++t) {
                xhat[off + t] = (x[off + t] - mean_c[c]) * invstd[c];
                out[off + t] = gm[c] * xhat[off + t] + bt[c];
            }
        }
    }
    const bool train = mode == Mode::train;
    return make_result(
        input.shape(), std::move(out), {input, gamma, beta},
        [=, xhat = std::move(xhat), invstd = std::move(invstd)](Node& self) {
            Node& xin = parent(self, 0);
            Node& gnode = parent(self, 1);
            Node& bnode = parent(self, 2);
            const auto& gy = self.grad;
            std::vector<double> sum_g(ch, 0.0), sum_gx(ch, 0.0);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t c = 0; c < ch; ++c) {
                    const std::size_t off = (b * ch + c) * len;
                    for (std::size_t t = 0; t < len; ++t) {
                        sum_g[c] += gy[off + t];
                        sum_gx[c] += gy[off + t] * xhat[off + t];
                    }
                }
            }
            if (gnode.requires_grad) {
                auto g = gnode.ensure_grad();
                for (std::size_t c = 0; c < ch; ++c) g[c] += sum_gx[c];
            }
            if (bnode.requires_grad) {
                auto g = bnode.ensure_grad();
                for (std::size_t c = 0; c < ch; ++c) g[c] += sum_g[c];
            }
            if (!xin.requires_grad) return;
            auto gx = xin.ensure_grad();
            const auto nn = static_cast<double>(n);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t c = 0; c < ch; ++c) {
                    const std::size_t off = (b * ch + c) * len;
                    const double k = gnode.value[c] * invstd[c];
                    for (std::size_t t = 0; t < len; ++t) {
                        if (train) {
                            gx[off + t] += k * (gy[off + t] - sum_g[c] / nn -
                                                xhat[off + t] * sum_gx[c] / nn);
                        } else {
                            gx[off + t] += k * gy[off + t];
                        }
                    }
                }
            }
        });
}

Tensor maxpool1d(const Tensor& input, std::size_t window) {
    require_rank(input, 3, "maxpool1d");
    if (window == 0) throw ShapeError("maxpool1d: window must be positive");
    const auto rows = input.dim(0) * input.dim(1);
    const auto len = input.dim(2);
    if (len < window) throw ShapeError("maxpool1d: input shorter than window");
    const auto out_len = len / window;
    std::vector<double> out(rows * out_len);
    std::vector<std::size_t> arg(rows * out_len);
    const auto& x = input.node()->value;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t t = 0; t < out_len; ++t) {
            std::size_t best = r * len + t * window;
            for (std::size_t k = 1; k < window; ++k) {
                const std::size_t i = r * len + t * window + k;
                if (x[i] > x[best]) best = i;
            }
            out[r * out_len + t] = x[best];
            arg[r * out_len + t] = best;
        }
    }
    return make_result({input.dim(0), input.dim(1), out_len}, std::move(out), {input},
                       [arg = std::move(arg)](Node& self) {
                           auto g = parent(self, 0).ensure_grad();
                           for (std::size_t i = 0; i < arg.size(); ++i) g[arg[i]] += self.grad[i];
                       });
}

}  // namespace scdc::nn
