#include "tvlm/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace tvlm {

namespace {

Var make_node(const char* op, Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backprop) {
    value.check_finite(op);
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->op = op;
    n->inputs = std::move(inputs);
    for (const auto& in : n->inputs) {
        if (in->needs_grad) n->needs_grad = true;
    }
    if (n->needs_grad) n->backprop = std::move(backprop);
    return n;
}

Tensor& ensure_grad(Node& n) {
    if (n.grad.numel() == 0) n.grad = Tensor(n.value.shape());
    return n.grad;
}

void accumulate(Node& n, const Tensor& g) {
    Tensor& dst = ensure_grad(n);
    const double* src = g.data();
    double* d = dst.data();
    const std::int64_t m = dst.numel();
    for (std::int64_t i = 0; i < m; ++i) d[i] += src[i];
}

// c[M,N] += a[M,K] * b[K,N]
void mm_nn(const double* a, const double* b, double* c, std::int64_t M, std::int64_t K, std::int64_t N) {
    for (std::int64_t m = 0; m < M; ++m) {
        double* crow = c + m * N;
        const double* arow = a + m * K;
        for (std::int64_t k = 0; k < K; ++k) {
            const double av = arow[k];
            const double* brow = b + k * N;
            for (std::int64_t n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

// c[M,K] += a[M,N] * b[K,N]^T
void mm_nt(const double* a, const double* b, double* c, std::int64_t M, std::int64_t N, std::int64_t K) {
    for (std::int64_t m = 0; m < M; ++m) {
        const double* arow = a + m * N;
        double* crow = c + m * K;
        for (std::int64_t k = 0; k < K; ++k) {
            const double* brow = b + k * N;
            double s = 0.0;
            for (std::int64_t n = 0; n < N; ++n) s += arow[n] * brow[n];
            crow[k] += s;
        }
    }
}

// c[K,N] += a[M,K]^T * b[M,N]
void mm_tn(const double* a, const double* b, double* c, std::int64_t M, std::int64_t K, std::int64_t N) {
    for (std::int64_t m = 0; m < M; ++m) {
        const double* arow = a + m * K;
        const double* brow = b + m * N;
        for (std::int64_t k = 0; k < K; ++k) {
            const double av = arow[k];
            double* crow = c + k * N;
            for (std::int64_t n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

Shape leading_dims(const Shape& s) {
    return Shape(s.begin(), s.end() - 2);
}

struct AxisSplit {
    std::int64_t outer, n, inner;
};

AxisSplit split_axis(const Shape& s, int axis) {
    const int r = static_cast<int>(s.size());
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw ShapeError("axis out of range for shape " + shape_str(s));
    AxisSplit sp{1, s[static_cast<std::size_t>(axis)], 1};
    for (int i = 0; i < axis; ++i) sp.outer *= s[static_cast<std::size_t>(i)];
    for (int i = axis + 1; i < r; ++i) sp.inner *= s[static_cast<std::size_t>(i)];
    return sp;
}

}  // namespace

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->op = "constant";
    return n;
}

Var leaf(const ParamPtr& p) {
    auto n = std::make_shared<Node>();
    n->value = p->value;
    n->op = "parameter";
    n->param = p;
    n->needs_grad = true;
    n->backprop = [](Node& self) {
        const double* g = self.grad.data();
        double* pg = self.param->grad.data();
        const std::int64_t m = self.param->grad.numel();
        for (std::int64_t i = 0; i < m; ++i) pg[i] += g[i];
    };
    return n;
}

Var matmul(const Var& a, const Var& b) {
    const Tensor& ta = a->value;
    const Tensor& tb = b->value;
    if (ta.rank() < 2 || tb.rank() < 2) {
        throw ShapeError("matmul requires rank >= 2: " + ta.shape_string() + " x " + tb.shape_string());
    }
    const std::int64_t M = ta.dim(-2), K = ta.dim(-1);
    const std::int64_t Kb = tb.dim(-2), N = tb.dim(-1);
    if (K != Kb) {
        throw ShapeError("matmul: inner dimensions disagree: " + ta.shape_string() + " x " + tb.shape_string());
    }
    const Shape la = leading_dims(ta.shape());
    const Shape lb = leading_dims(tb.shape());
    Shape lead;
    if (la == lb) {
        lead = la;
    } else if (la.empty()) {
        lead = lb;
    } else if (lb.empty()) {
        lead = la;
    } else {
        throw ShapeError("matmul: incompatible batch dimensions: " + ta.shape_string() + " x " + tb.shape_string());
    }
    const std::int64_t batch = shape_numel(lead);
    const bool a_batched = !la.empty();
    const bool b_batched = !lb.empty();

    Shape out_shape = lead;
    out_shape.push_back(M);
    out_shape.push_back(N);
    Tensor out(out_shape);
    for (std::int64_t i = 0; i < batch; ++i) {
        const double* pa = ta.data() + (a_batched ? i * M * K : 0);
        const double* pb = tb.data() + (b_batched ? i * K * N : 0);
        mm_nn(pa, pb, out.data() + i * M * N, M, K, N);
    }

    return make_node("matmul", std::move(out), {a, b},
                     [M, K, N, batch, a_batched, b_batched](Node& self) {
                         Node& na = *self.inputs[0];
                         Node& nb = *self.inputs[1];
                         const double* g = self.grad.data();
                         if (na.needs_grad) {
                             Tensor& da = ensure_grad(na);
                             for (std::int64_t i = 0; i < batch; ++i) {
                                 const double* pb = nb.value.data() + (b_batched ? i * K * N : 0);
                                 mm_nt(g + i * M * N, pb, da.data() + (a_batched ? i * M * K : 0), M, N, K);
                             }
                         }
                         if (nb.needs_grad) {
                             Tensor& db = ensure_grad(nb);
                             for (std::int64_t i = 0; i < batch; ++i) {
                                 const double* pa = na.value.data() + (a_batched ? i * M * K : 0);
                                 mm_tn(pa, g + i * M * N, db.data() + (b_batched ? i * K * N : 0), M, K, N);
                             }
                         }
                     });
}

Var add(const Var& a, const Var& b) {
    const Tensor& ta = a->value;
    const Tensor& tb = b->value;
    const auto& sa = ta.shape();
    const auto& sb = tb.shape();
    if (sb.size() > sa.size() || !std::equal(sb.rbegin(), sb.rend(), sa.rbegin())) {
        throw ShapeError("add: " + shape_str(sb) + " is not a trailing suffix of " + shape_str(sa));
    }
    const std::int64_t nb = tb.numel();
    const std::int64_t reps = ta.numel() / std::max<std::int64_t>(nb, 1);
    Tensor out(sa);
    const double* pa = ta.data();
    const double* pb = tb.data();
    double* po = out.data();
    for (std::int64_t r = 0; r < reps; ++r) {
        for (std::int64_t i = 0; i < nb; ++i) po[r * nb + i] = pa[r * nb + i] + pb[i];
    }
    return make_node("add", std::move(out), {a, b}, [nb, reps](Node& self) {
        Node& na = *self.inputs[0];
        Node& nbn = *self.inputs[1];
        const double* g = self.grad.data();
        if (na.needs_grad) accumulate(na, self.grad);
        if (nbn.needs_grad) {
            Tensor& db = ensure_grad(nbn);
            double* pd = db.data();
            for (std::int64_t r = 0; r < reps; ++r) {
                for (std::int64_t i = 0; i < nb; ++i) pd[i] += g[r * nb + i];
            }
        }
    });
}

Var mul(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) {
        throw ShapeError("mul: shape mismatch: " + a->value.shape_string() + " vs " + b->value.shape_string());
    }
    Tensor out(a->value.shape());
    const std::int64_t n = out.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = a->value[i] * b->value[i];
    return make_node("mul", std::move(out), {a, b}, [n](Node& self) {
        Node& na = *self.inputs[0];
        Node& nb = *self.inputs[1];
        const double* g = self.grad.data();
        if (na.needs_grad) {
            Tensor& da = ensure_grad(na);
            for (std::int64_t i = 0; i < n; ++i) da[i] += g[i] * nb.value[i];
        }
        if (nb.needs_grad) {
            Tensor& db = ensure_grad(nb);
            for (std::int64_t i = 0; i < n; ++i) db[i] += g[i] * na.value[i];
        }
    });
}

Var scale(const Var& a, double s) {
    Tensor out(a->value.shape());
    const std::int64_t n = out.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = a->value[i] * s;
    return make_node("scale", std::move(out), {a}, [s, n](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double* g = self.grad.data();
        for (std::int64_t i = 0; i < n; ++i) da[i] += g[i] * s;
    });
}

namespace {

Tensor transpose_last2(const Tensor& t) {
    if (t.rank() < 2) throw ShapeError("transpose requires rank >= 2, got " + t.shape_string());
    Shape s = t.shape();
    const std::int64_t R = s[s.size() - 2], C = s[s.size() - 1];
    std::swap(s[s.size() - 2], s[s.size() - 1]);
    Tensor out(s);
    const std::int64_t batch = t.numel() / (R * C);
    for (std::int64_t b = 0; b < batch; ++b) {
        const double* src = t.data() + b * R * C;
        double* dst = out.data() + b * R * C;
        for (std::int64_t r = 0; r < R; ++r) {
            for (std::int64_t c = 0; c < C; ++c) dst[c * R + r] = src[r * C + c];
        }
    }
    return out;
}

}  // namespace

Var transpose2(const Var& a) {
    Tensor out = transpose_last2(a->value);
    return make_node("transpose2", std::move(out), {a}, [](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        accumulate(na, transpose_last2(self.grad));
    });
}

Var reshape(const Var& a, Shape shape) {
    if (shape_numel(shape) != a->value.numel()) {
        throw ShapeError("reshape: cannot view " + a->value.shape_string() + " as " + shape_str(shape));
    }
    Tensor out(std::move(shape), a->value.values());
    Shape orig = a->value.shape();
    return make_node("reshape", std::move(out), {a}, [orig](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        accumulate(na, Tensor(orig, self.grad.values()));
    });
}

Var split_heads(const Var& a, std::int64_t heads) {
    const Tensor& t = a->value;
    if (t.rank() != 2) throw ShapeError("split_heads expects [L, H*Dh], got " + t.shape_string());
    const std::int64_t L = t.dim(0), D = t.dim(1);
    if (D % heads != 0) throw ShapeError("split_heads: dim " + std::to_string(D) + " not divisible by " + std::to_string(heads));
    const std::int64_t Dh = D / heads;
    Tensor out({heads, L, Dh});
    for (std::int64_t h = 0; h < heads; ++h) {
        for (std::int64_t l = 0; l < L; ++l) {
            for (std::int64_t d = 0; d < Dh; ++d) out[(h * L + l) * Dh + d] = t[l * D + h * Dh + d];
        }
    }
    return make_node("split_heads", std::move(out), {a}, [heads, L, D, Dh](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double* g = self.grad.data();
        for (std::int64_t h = 0; h < heads; ++h) {
            for (std::int64_t l = 0; l < L; ++l) {
                for (std::int64_t d = 0; d < Dh; ++d) da[l * D + h * Dh + d] += g[(h * L + l) * Dh + d];
            }
        }
    });
}

Var merge_heads(const Var& a) {
    const Tensor& t = a->value;
    if (t.rank() != 3) throw ShapeError("merge_heads expects [H, L, Dh], got " + t.shape_string());
    const std::int64_t H = t.dim(0), L = t.dim(1), Dh = t.dim(2);
    const std::int64_t D = H * Dh;
    Tensor out({L, D});
    for (std::int64_t h = 0; h < H; ++h) {
        for (std::int64_t l = 0; l < L; ++l) {
            for (std::int64_t d = 0; d < Dh; ++d) out[l * D + h * Dh + d] = t[(h * L + l) * Dh + d];
        }
    }
    return make_node("merge_heads", std::move(out), {a}, [H, L, Dh, D](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double* g = self.grad.data();
        for (std::int64_t h = 0; h < H; ++h) {
            for (std::int64_t l = 0; l < L; ++l) {
                for (std::int64_t d = 0; d < Dh; ++d) da[(h * L + l) * Dh + d] += g[l * D + h * Dh + d];
            }
        }
    });
}

Var softmax(const Var& a, int axis) {
    const Tensor& t = a->value;
    const AxisSplit sp = split_axis(t.shape(), axis);
    Tensor out(t.shape());
    for (std::int64_t o = 0; o < sp.outer; ++o) {
        for (std::int64_t in = 0; in < sp.inner; ++in) {
            const std::int64_t base = o * sp.n * sp.inner + in;
            double mx = t[base];
            for (std::int64_t j = 1; j < sp.n; ++j) mx = std::max(mx, t[base + j * sp.inner]);
            double sum = 0.0;
            for (std::int64_t j = 0; j < sp.n; ++j) {
                const double e = std::exp(t[base + j * sp.inner] - mx);
                out[base + j * sp.inner] = e;
                sum += e;
            }
            for (std::int64_t j = 0; j < sp.n; ++j) out[base + j * sp.inner] /= sum;
        }
    }
    return make_node("softmax", std::move(out), {a}, [sp](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const Tensor& y = self.value;
        const double* g = self.grad.data();
        for (std::int64_t o = 0; o < sp.outer; ++o) {
            for (std::int64_t in = 0; in < sp.inner; ++in) {
                const std::int64_t base = o * sp.n * sp.inner + in;
                double dot = 0.0;
                for (std::int64_t j = 0; j < sp.n; ++j) dot += g[base + j * sp.inner] * y[base + j * sp.inner];
                for (std::int64_t j = 0; j < sp.n; ++j) {
                    const std::int64_t k = base + j * sp.inner;
                    da[k] += y[k] * (g[k] - dot);
                }
            }
        }
    });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias) {
    const Tensor& t = x->value;
    const std::int64_t N = t.dim(-1);
    if (gain->value.numel() != N || bias->value.numel() != N) {
        throw ShapeError("layer_norm: gain/bias " + gain->value.shape_string() + "/" + bias->value.shape_string() +
                         " do not match last axis of " + t.shape_string());
    }
    const std::int64_t rows = t.numel() / N;
    Tensor out(t.shape());
    // cache normalized values and inverse std per row for backward
    auto xhat = std::make_shared<Tensor>(t.shape());
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* px = t.data() + r * N;
        double mean = 0.0;
        for (std::int64_t i = 0; i < N; ++i) mean += px[i];
        mean /= static_cast<double>(N);
        double var = 0.0;
        for (std::int64_t i = 0; i < N; ++i) {
            const double d = px[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(N);
        const double istd = 1.0 / std::sqrt(var + kLayerNormEps);
        (*inv_std)[static_cast<std::size_t>(r)] = istd;
        for (std::int64_t i = 0; i < N; ++i) {
            const double h = (px[i] - mean) * istd;
            (*xhat)[r * N + i] = h;
            out[r * N + i] = h * gain->value[i] + bias->value[i];
        }
    }
    return make_node("layer_norm", std::move(out), {x, gain, bias}, [N, rows, xhat, inv_std](Node& self) {
        Node& nx = *self.inputs[0];
        Node& ng = *self.inputs[1];
        Node& nb = *self.inputs[2];
        const double* g = self.grad.data();
        if (ng.needs_grad) {
            Tensor& dg = ensure_grad(ng);
            for (std::int64_t r = 0; r < rows; ++r) {
                for (std::int64_t i = 0; i < N; ++i) dg[i] += g[r * N + i] * (*xhat)[r * N + i];
            }
        }
        if (nb.needs_grad) {
            Tensor& db = ensure_grad(nb);
            for (std::int64_t r = 0; r < rows; ++r) {
                for (std::int64_t i = 0; i < N; ++i) db[i] += g[r * N + i];
            }
        }
        if (nx.needs_grad) {
            Tensor& dx = ensure_grad(nx);
            const Tensor& gn = ng.value;
            for (std::int64_t r = 0; r < rows; ++r) {
                const double istd = (*inv_std)[static_cast<std::size_t>(r)];
                double sum_dh = 0.0, sum_dh_h = 0.0;
                for (std::int64_t i = 0; i < N; ++i) {
                    const double dh = g[r * N + i] * gn[i];
                    sum_dh += dh;
                    sum_dh_h += dh * (*xhat)[r * N + i];
                }
                const double inv_n = 1.0 / static_cast<double>(N);
                for (std::int64_t i = 0; i < N; ++i) {
                    const double dh = g[r * N + i] * gn[i];
                    const double h = (*xhat)[r * N + i];
                    dx[r * N + i] += istd * (dh - inv_n * sum_dh - h * inv_n * sum_dh_h);
                }
            }
        }
    });
}

Var gelu(const Var& a) {
    const Tensor& t = a->value;
    Tensor out(t.shape());
    const std::int64_t n = t.numel();
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = 0.5 * t[i] * (1.0 + std::erf(t[i] * inv_sqrt2));
    }
    return make_node("gelu", std::move(out), {a}, [n](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double* g = self.grad.data();
        constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
        constexpr double inv_sqrt2pi = 1.0 / 2.5066282746310002;
        for (std::int64_t i = 0; i < n; ++i) {
            const double x = na.value[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
            const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
            da[i] += g[i] * (cdf + x * pdf);
        }
    });
}

Var embedding_rows(const Var& table, const std::vector<int>& ids) {
    const Tensor& t = table->value;
    if (t.rank() != 2) throw ShapeError("embedding_rows expects a 2-d table, got " + t.shape_string());
    const std::int64_t rows = t.dim(0), D = t.dim(1);
    for (int id : ids) {
        if (id < 0 || id >= rows) {
            throw DomainError("embedding id " + std::to_string(id) + " out of range [0," + std::to_string(rows) + ")");
        }
    }
    Tensor out({static_cast<std::int64_t>(ids.size()), D});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double* src = t.data() + static_cast<std::int64_t>(ids[i]) * D;
        std::copy(src, src + D, out.data() + static_cast<std::int64_t>(i) * D);
    }
    return make_node("embedding_rows", std::move(out), {table}, [ids, D](Node& self) {
        Node& nt = *self.inputs[0];
        if (!nt.needs_grad) return;
        Tensor& dt = ensure_grad(nt);
        const double* g = self.grad.data();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            double* dst = dt.data() + static_cast<std::int64_t>(ids[i]) * D;
            const double* src = g + static_cast<std::int64_t>(i) * D;
            for (std::int64_t d = 0; d < D; ++d) dst[d] += src[d];
        }
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty input list");
    Shape trailing(parts[0]->value.shape().begin() + 1, parts[0]->value.shape().end());
    std::int64_t rows = 0;
    for (const auto& p : parts) {
        Shape t(p->value.shape().begin() + 1, p->value.shape().end());
        if (t != trailing) {
            throw ShapeError("concat_rows: trailing dims disagree: " + shape_str(trailing) + " vs " + shape_str(t));
        }
        rows += p->value.dim(0);
    }
    Shape out_shape = {rows};
    out_shape.insert(out_shape.end(), trailing.begin(), trailing.end());
    Tensor out(out_shape);
    std::int64_t off = 0;
    for (const auto& p : parts) {
        const std::int64_t n = p->value.numel();
        std::copy(p->value.data(), p->value.data() + n, out.data() + off);
        off += n;
    }
    return make_node("concat_rows", std::move(out), parts, [](Node& self) {
        std::int64_t off = 0;
        for (auto& in : self.inputs) {
            const std::int64_t n = in->value.numel();
            if (in->needs_grad) {
                Tensor& d = ensure_grad(*in);
                const double* g = self.grad.data() + off;
                for (std::int64_t i = 0; i < n; ++i) d[i] += g[i];
            }
            off += n;
        }
    });
}

Var slice_rows(const Var& a, std::int64_t begin, std::int64_t end) {
    const Tensor& t = a->value;
    if (t.rank() < 1 || begin < 0 || end > t.dim(0) || begin > end) {
        throw ShapeError("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") invalid for " +
                         t.shape_string());
    }
    const std::int64_t row_sz = t.numel() / std::max<std::int64_t>(t.dim(0), 1);
    Shape out_shape = t.shape();
    out_shape[0] = end - begin;
    Tensor out(out_shape);
    std::copy(t.data() + begin * row_sz, t.data() + end * row_sz, out.data());
    return make_node("slice_rows", std::move(out), {a}, [begin, row_sz](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double* g = self.grad.data();
        const std::int64_t n = self.value.numel();
        double* dst = da.data() + begin * row_sz;
        for (std::int64_t i = 0; i < n; ++i) dst[i] += g[i];
    });
}

Var cross_entropy_lm(const Var& logits, const std::vector<int>& targets, const std::vector<bool>& mask) {
    const Tensor& t = logits->value;
    if (t.rank() != 2) throw ShapeError("cross_entropy_lm expects [L, V] logits, got " + t.shape_string());
    const std::int64_t L = t.dim(0), V = t.dim(1);
    if (static_cast<std::int64_t>(targets.size()) != L || static_cast<std::int64_t>(mask.size()) != L) {
        throw ShapeError("cross_entropy_lm: targets/mask length must equal " + std::to_string(L));
    }
    std::int64_t supervised = 0;
    for (std::int64_t i = 0; i < L; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        ++supervised;
        const int tgt = targets[static_cast<std::size_t>(i)];
        if (tgt < 0 || tgt >= V) {
            throw DomainError("target id " + std::to_string(tgt) + " out of range [0," + std::to_string(V) + ")");
        }
    }
    if (supervised == 0) throw DomainError("cross_entropy_lm: no supervised tokens (mask is all-false)");

    // cache per-row softmax for backward
    auto probs = std::make_shared<Tensor>(Shape{L, V});
    double loss = 0.0;
    for (std::int64_t i = 0; i < L; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        const double* row = t.data() + i * V;
        double mx = row[0];
        for (std::int64_t v = 1; v < V; ++v) mx = std::max(mx, row[v]);
        double sum = 0.0;
        for (std::int64_t v = 0; v < V; ++v) {
            const double e = std::exp(row[v] - mx);
            (*probs)[i * V + v] = e;
            sum += e;
        }
        for (std::int64_t v = 0; v < V; ++v) (*probs)[i * V + v] /= sum;
        const double log_z = std::log(sum) + mx;
        loss += log_z - row[targets[static_cast<std::size_t>(i)]];
    }
    loss /= static_cast<double>(supervised);

    return make_node("cross_entropy_lm", Tensor::scalar(loss), {logits},
                     [targets, mask, probs, L, V, supervised](Node& self) {
                         Node& nl = *self.inputs[0];
                         if (!nl.needs_grad) return;
                         Tensor& dl = ensure_grad(nl);
                         const double gscale = self.grad[0] / static_cast<double>(supervised);
                         for (std::int64_t i = 0; i < L; ++i) {
                             if (!mask[static_cast<std::size_t>(i)]) continue;
                             for (std::int64_t v = 0; v < V; ++v) dl[i * V + v] += gscale * (*probs)[i * V + v];
                             dl[i * V + targets[static_cast<std::size_t>(i)]] -= gscale;
                         }
                     });
}

Var reduce_sum(const Var& a) {
    double s = 0.0;
    for (double v : a->value.values()) s += v;
    return make_node("reduce_sum", Tensor::scalar(s), {a}, [](Node& self) {
        Node& na = *self.inputs[0];
        if (!na.needs_grad) return;
        Tensor& da = ensure_grad(na);
        const double g = self.grad[0];
        for (auto& v : da.values()) v += g;
    });
}

void backward(const Var& root) {
    if (!root->value.is_scalar()) {
        throw StructuralError("backward expects a scalar loss, got shape " + root->value.shape_string());
    }
    if (!root->needs_grad) {
        throw StructuralError("backward: value is not derived from any parameter");
    }
    // iterative post-order topological sort over the needs_grad subgraph
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->inputs.size()) {
            Node* child = node->inputs[idx].get();
            ++idx;
            if (child->needs_grad && !visited.count(child)) {
                visited.insert(child);
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->grad = Tensor::scalar(1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && n->grad.numel() > 0) n->backprop(*n);
    }
}

void zero_grads(const std::vector<ParamPtr>& params) {
    for (const auto& p : params) p->zero_grad();
}

}  // namespace tvlm
