#include "trajflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trajflow {

namespace {

void require(bool ok, const std::string& op, const std::string& what) {
    if (!ok) throw ShapeError(op + ": " + what);
}

void require_same_shape(const Array& a, const Array& b, const std::string& op) {
    require(a.same_shape(b), op,
            "shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
}

void require_2d(const Array& x, const std::string& op) {
    require(x.ndim() == 2, op, "expected 2-D input, got " + shape_str(x.shape()));
}

}  // namespace

Array k_add(const Array& a, const Array& b) {
    require_same_shape(a, b, "add");
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Array k_sub(const Array& a, const Array& b) {
    require_same_shape(a, b, "sub");
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Array k_mul(const Array& a, const Array& b) {
    require_same_shape(a, b, "mul");
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Array k_scale(const Array& a, double c) {
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * c;
    return out;
}

Array k_dense(const Array& x, const Array& w, const Array& b) {
    require(x.ndim() == 1, "dense", "input must be a vector, got " + shape_str(x.shape()));
    require(w.ndim() == 2, "dense", "weight must be 2-D, got " + shape_str(w.shape()));
    const std::size_t n_out = w.dim(0), n_in = w.dim(1);
    require(x.size() == n_in, "dense",
            "input length " + std::to_string(x.size()) + " vs weight " + shape_str(w.shape()));
    require(b.size() == n_out, "dense", "bias length mismatch");
    Array y({n_out});
    for (std::size_t o = 0; o < n_out; ++o) {
        double acc = b[o];
        const double* wrow = w.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
    return y;
}

void kb_dense(const Array& g, const Array& x, const Array& w, Array& dx, Array& dw, Array& db) {
    const std::size_t n_out = w.dim(0), n_in = w.dim(1);
    for (std::size_t o = 0; o < n_out; ++o) {
        const double go = g[o];
        db[o] += go;
        const double* wrow = w.data() + o * n_in;
        double* dwrow = dw.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) {
            dwrow[i] += go * x[i];
            dx[i] += go * wrow[i];
        }
    }
}

Array k_conv1d(const Array& x, const Array& w, const Array& b, int stride) {
    require_2d(x, "conv1d");
    require(w.ndim() == 3, "conv1d", "kernel must be 3-D, got " + shape_str(w.shape()));
    const std::size_t c_in = x.dim(0), len = x.dim(1);
    const std::size_t c_out = w.dim(0), k = w.dim(2);
    require(w.dim(1) == c_in, "conv1d",
            "input channels " + std::to_string(c_in) + " vs kernel " + shape_str(w.shape()));
    require(k % 2 == 1, "conv1d", "kernel size must be odd");
    require(b.size() == c_out, "conv1d", "bias length mismatch");
    require(stride >= 1 && len % static_cast<std::size_t>(stride) == 0, "conv1d",
            "stride must divide input length");
    const std::size_t s = static_cast<std::size_t>(stride);
    const std::size_t l_out = len / s;
    const long pad = static_cast<long>(k / 2);

    Array y({c_out, l_out});
    for (std::size_t co = 0; co < c_out; ++co) {
        double* yrow = y.data() + co * l_out;
        const double bc = b[co];
        for (std::size_t lo = 0; lo < l_out; ++lo) yrow[lo] = bc;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* xrow = x.data() + ci * len;
            const double* wrow = w.data() + (co * c_in + ci) * k;
            for (std::size_t j = 0; j < k; ++j) {
                const double wv = wrow[j];
                const long off = static_cast<long>(j) - pad;
                // valid lo range: 0 <= lo*s + off < len
                long lo_begin = off < 0 ? (-off + static_cast<long>(s) - 1) / static_cast<long>(s) : 0;
                long lo_end = static_cast<long>(l_out);  // exclusive
                while (lo_end > 0 && (lo_end - 1) * static_cast<long>(s) + off >= static_cast<long>(len))
                    --lo_end;
                const double* xp = xrow + lo_begin * static_cast<long>(s) + off;
                for (long lo = lo_begin; lo < lo_end; ++lo) {
                    yrow[lo] += wv * (*xp);
                    xp += s;
                }
            }
        }
    }
    return y;
}

void kb_conv1d(const Array& g, const Array& x, const Array& w, Array& dx, Array& dw, Array& db,
               int stride) {
    const std::size_t c_in = x.dim(0), len = x.dim(1);
    const std::size_t c_out = w.dim(0), k = w.dim(2);
    const std::size_t s = static_cast<std::size_t>(stride);
    const std::size_t l_out = len / s;
    const long pad = static_cast<long>(k / 2);

    for (std::size_t co = 0; co < c_out; ++co) {
        const double* grow = g.data() + co * l_out;
        double acc_b = 0.0;
        for (std::size_t lo = 0; lo < l_out; ++lo) acc_b += grow[lo];
        db[co] += acc_b;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* xrow = x.data() + ci * len;
            double* dxrow = dx.data() + ci * len;
            const double* wrow = w.data() + (co * c_in + ci) * k;
            double* dwrow = dw.data() + (co * c_in + ci) * k;
            for (std::size_t j = 0; j < k; ++j) {
                const long off = static_cast<long>(j) - pad;
                long lo_begin = off < 0 ? (-off + static_cast<long>(s) - 1) / static_cast<long>(s) : 0;
                long lo_end = static_cast<long>(l_out);
                while (lo_end > 0 && (lo_end - 1) * static_cast<long>(s) + off >= static_cast<long>(len))
                    --lo_end;
                const double wv = wrow[j];
                double acc_w = 0.0;
                const double* xp = xrow + lo_begin * static_cast<long>(s) + off;
                double* dxp = dxrow + lo_begin * static_cast<long>(s) + off;
                for (long lo = lo_begin; lo < lo_end; ++lo) {
                    const double gv = grow[lo];
                    acc_w += gv * (*xp);
                    *dxp += gv * wv;
                    xp += s;
                    dxp += s;
                }
                dwrow[j] += acc_w;
            }
        }
    }
}

Array k_group_norm(const Array& x, const Array& gamma, const Array& beta, int groups, double eps) {
    require_2d(x, "group_norm");
    const std::size_t c = x.dim(0), len = x.dim(1);
    require(groups >= 1 && c % static_cast<std::size_t>(groups) == 0, "group_norm",
            "channel count " + std::to_string(c) + " not divisible by groups");
    require(gamma.size() == c && beta.size() == c, "group_norm", "scale/shift length mismatch");
    const std::size_t cg = c / static_cast<std::size_t>(groups);
    const std::size_t m = cg * len;

    Array y({c, len});
    for (int gidx = 0; gidx < groups; ++gidx) {
        const std::size_t c0 = static_cast<std::size_t>(gidx) * cg;
        double mean = 0.0;
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            for (std::size_t l = 0; l < len; ++l) mean += xrow[l];
        }
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            for (std::size_t l = 0; l < len; ++l) {
                const double d = xrow[l] - mean;
                var += d * d;
            }
        }
        var /= static_cast<double>(m);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            double* yrow = y.data() + ci * len;
            const double a = gamma[ci] * inv_std;
            const double bshift = beta[ci] - a * mean;
            for (std::size_t l = 0; l < len; ++l) yrow[l] = a * xrow[l] + bshift;
        }
    }
    return y;
}

void kb_group_norm(const Array& g, const Array& x, const Array& gamma, Array& dx, Array& dgamma,
                   Array& dbeta, int groups, double eps) {
    const std::size_t c = x.dim(0), len = x.dim(1);
    const std::size_t cg = c / static_cast<std::size_t>(groups);
    const double m = static_cast<double>(cg * len);

    for (int gidx = 0; gidx < groups; ++gidx) {
        const std::size_t c0 = static_cast<std::size_t>(gidx) * cg;
        double mean = 0.0, var = 0.0;
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            for (std::size_t l = 0; l < len; ++l) mean += xrow[l];
        }
        mean /= m;
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            for (std::size_t l = 0; l < len; ++l) {
                const double d = xrow[l] - mean;
                var += d * d;
            }
        }
        var /= m;
        const double inv_std = 1.0 / std::sqrt(var + eps);

        // dxhat = g * gamma; reduce dxhat and dxhat*xhat over the group.
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            const double* grow = g.data() + ci * len;
            const double gm = gamma[ci];
            double acc_g = 0.0, acc_gx = 0.0;
            for (std::size_t l = 0; l < len; ++l) {
                const double xhat = (xrow[l] - mean) * inv_std;
                const double dxh = grow[l] * gm;
                acc_g += dxh;
                acc_gx += dxh * xhat;
                dgamma[ci] += grow[l] * xhat;
                dbeta[ci] += grow[l];
            }
            sum_dxhat += acc_g;
            sum_dxhat_xhat += acc_gx;
        }
        for (std::size_t ci = c0; ci < c0 + cg; ++ci) {
            const double* xrow = x.data() + ci * len;
            const double* grow = g.data() + ci * len;
            double* dxrow = dx.data() + ci * len;
            const double gm = gamma[ci];
            for (std::size_t l = 0; l < len; ++l) {
                const double xhat = (xrow[l] - mean) * inv_std;
                const double dxh = grow[l] * gm;
                dxrow[l] += inv_std * (dxh - sum_dxhat / m - xhat * sum_dxhat_xhat / m);
            }
        }
    }
}

double mish_scalar(double x) {
    // x * tanh(softplus(x)) with tanh(softplus(x)) = q / (q + 2), q = e^2x + 2e^x.
    if (x > 20.0) return x;
    const double e = std::exp(x);
    const double q = e * e + 2.0 * e;
    return x * (q / (q + 2.0));
}

Array k_mish(const Array& x) {
    Array y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = mish_scalar(x[i]);
    return y;
}

void kb_mish(const Array& g, const Array& x, Array& dx) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xv = x[i];
        double d;
        if (xv > 20.0) {
            d = 1.0;
        } else {
            const double e = std::exp(xv);
            const double q = e * e + 2.0 * e;
            const double t = q / (q + 2.0);
            const double sig = e / (1.0 + e);
            d = t + xv * (1.0 - t * t) * sig;
        }
        dx[i] += g[i] * d;
    }
}

Array k_film(const Array& x, const Array& scale, const Array& shift) {
    require_2d(x, "film");
    const std::size_t c = x.dim(0), len = x.dim(1);
    require(scale.size() == c, "film",
            "scale length " + std::to_string(scale.size()) + " vs channels " + std::to_string(c));
    require(shift.size() == c, "film", "shift length mismatch");
    Array y({c, len});
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double a = 1.0 + scale[ci];
        const double s = shift[ci];
        const double* xrow = x.data() + ci * len;
        double* yrow = y.data() + ci * len;
        for (std::size_t l = 0; l < len; ++l) yrow[l] = xrow[l] * a + s;
    }
    return y;
}

void kb_film(const Array& g, const Array& x, const Array& scale, Array& dx, Array& dscale,
             Array& dshift) {
    const std::size_t c = x.dim(0), len = x.dim(1);
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double a = 1.0 + scale[ci];
        const double* xrow = x.data() + ci * len;
        const double* grow = g.data() + ci * len;
        double* dxrow = dx.data() + ci * len;
        double acc_s = 0.0, acc_b = 0.0;
        for (std::size_t l = 0; l < len; ++l) {
            acc_s += grow[l] * xrow[l];
            acc_b += grow[l];
            dxrow[l] += grow[l] * a;
        }
        dscale[ci] += acc_s;
        dshift[ci] += acc_b;
    }
}

Array k_concat_channels(const Array& a, const Array& b) {
    require_2d(a, "concat_channels");
    require_2d(b, "concat_channels");
    require(a.dim(1) == b.dim(1), "concat_channels", "trailing lengths differ");
    Array y({a.dim(0) + b.dim(0), a.dim(1)});
    std::copy(a.data(), a.data() + a.size(), y.data());
    std::copy(b.data(), b.data() + b.size(), y.data() + a.size());
    return y;
}

void kb_concat_channels(const Array& g, Array& da, Array& db) {
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i];
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[da.size() + i];
}

Array k_slice_vec(const Array& x, std::size_t offset, std::size_t len) {
    require(x.ndim() == 1, "slice_vec", "expected a vector");
    require(offset + len <= x.size(), "slice_vec", "slice out of range");
    Array y({len});
    std::copy(x.data() + offset, x.data() + offset + len, y.data());
    return y;
}

void kb_slice_vec(const Array& g, Array& dx, std::size_t offset) {
    for (std::size_t i = 0; i < g.size(); ++i) dx[offset + i] += g[i];
}

Array k_upsample_nearest2(const Array& x) {
    require_2d(x, "upsample_nearest2");
    const std::size_t c = x.dim(0), len = x.dim(1);
    Array y({c, 2 * len});
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double* xrow = x.data() + ci * len;
        double* yrow = y.data() + ci * 2 * len;
        for (std::size_t l = 0; l < len; ++l) {
            yrow[2 * l] = xrow[l];
            yrow[2 * l + 1] = xrow[l];
        }
    }
    return y;
}

void kb_upsample_nearest2(const Array& g, Array& dx) {
    const std::size_t c = dx.dim(0), len = dx.dim(1);
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double* grow = g.data() + ci * 2 * len;
        double* dxrow = dx.data() + ci * len;
        for (std::size_t l = 0; l < len; ++l) dxrow[l] += grow[2 * l] + grow[2 * l + 1];
    }
}

Array k_transpose2d(const Array& x) {
    require_2d(x, "transpose2d");
    const std::size_t r = x.dim(0), c = x.dim(1);
    Array y({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) y.data()[j * r + i] = x.data()[i * c + j];
    return y;
}

void kb_transpose2d(const Array& g, Array& dx) {
    const std::size_t r = dx.dim(0), c = dx.dim(1);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) dx.data()[i * c + j] += g.data()[j * r + i];
}

Array k_mean_square(const Array& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * x[i];
    return Array::scalar(acc / static_cast<double>(x.size()));
}

void kb_mean_square(const Array& g, const Array& x, Array& dx) {
    const double c = 2.0 * g[0] / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] += c * x[i];
}

Array k_mean(const Array& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
    return Array::scalar(acc / static_cast<double>(x.size()));
}

void kb_mean(const Array& g, const Array& x, Array& dx) {
    const double c = g[0] / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] += c;
}

Array k_sum(const Array& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
    return Array::scalar(acc);
}

void kb_sum(const Array& g, const Array& x, Array& dx) {
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] += g[0];
}

}  // namespace trajflow
