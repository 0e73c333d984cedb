#include "fediih/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fediih {

namespace {

thread_local Tape* g_current_tape = nullptr;

std::string shape_str(const Tensor& t) {
    return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + shape_str(a) + ") vs (" + shape_str(b) + ")");
}

void ensure_grad(detail::Node* n) {
    if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
}

bool tracked(const Tensor& t) { return t.requires_grad() && g_current_tape != nullptr; }

// Marks the output as differentiable and records the closure when a tape is
// active and any input participates.
void record_if(bool any_tracked, Tensor& out, std::function<void()> fn) {
    if (!any_tracked || g_current_tape == nullptr) return;
    out.set_requires_grad(true);
    Tape::record(out, std::move(fn));
}

}  // namespace

Tensor::Tensor(int rows, int cols) : node_(std::make_shared<detail::Node>()) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative dimension");
    node_->rows = rows;
    node_->cols = cols;
    node_->value.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Tensor Tensor::full(int rows, int cols, double v) {
    Tensor t(rows, cols);
    std::fill(t.value().begin(), t.value().end(), v);
    return t;
}

Tensor Tensor::from(int rows, int cols, std::vector<double> data) {
    if (static_cast<long>(data.size()) != static_cast<long>(rows) * cols)
        throw std::invalid_argument("Tensor::from: data length does not match shape");
    Tensor t(rows, cols);
    t.value() = std::move(data);
    return t;
}

Tensor Tensor::randn(int rows, int cols, Rng& rng, double stddev) {
    Tensor t(rows, cols);
    for (auto& x : t.value()) x = rng.normal(0.0, stddev);
    return t;
}

Tensor Tensor::glorot(int rows, int cols, Rng& rng) {
    Tensor t(rows, cols);
    double s = std::sqrt(6.0 / (rows + cols));
    for (auto& x : t.value()) x = rng.uniform(-s, s);
    return t;
}

double Tensor::scalar() const {
    if (rows() != 1 || cols() != 1) throw std::invalid_argument("Tensor::scalar: tensor is " + shape_str(*this) + ", expected 1x1");
    return node_->value[0];
}

Tensor& Tensor::set_requires_grad(bool flag) {
    node_->requires_grad = flag;
    if (flag) ensure_grad(node_.get());
    return *this;
}

std::vector<double>& Tensor::grad() {
    if (!node_->requires_grad) throw std::logic_error("Tensor::grad: tensor does not require grad");
    ensure_grad(node_.get());
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---- Tape -------------------------------------------------------------------

Tape::Tape() {
    previous_ = g_current_tape;
    g_current_tape = this;
}

Tape::~Tape() { g_current_tape = previous_; }

Tape* Tape::current() { return g_current_tape; }

void Tape::record(Tensor output, std::function<void()> backward_fn) {
    g_current_tape->entries_.push_back({output.node_, std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
    if (loss.rows() != 1 || loss.cols() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss));
    if (!loss.requires_grad()) throw std::logic_error("backward: loss does not depend on any tracked tensor");
    ensure_grad(loss.node());
    loss.node()->grad[0] = 1.0;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        ensure_grad(it->output.get());
        it->backward_fn();
    }
    entries_.clear();
}

// ---- primitives --------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a, b);
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Tensor out(n, m);
    const double* av = a.value().data();
    const double* bv = b.value().data();
    double* ov = out.value().data();
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            double x = av[i * k + p];
            if (x == 0.0) continue;
            const double* brow = bv + p * m;
            double* orow = ov + i * m;
            for (int j = 0; j < m; ++j) orow[j] += x * brow[j];
        }
    bool ta = tracked(a), tb = tracked(b);
    record_if(ta || tb, out, [a, b, out, n, k, m, ta, tb]() mutable {
        const double* g = out.node()->grad.data();
        if (ta) {
            ensure_grad(a.node());
            double* ga = a.node()->grad.data();
            const double* bv = b.value().data();
            for (int i = 0; i < n; ++i)
                for (int p = 0; p < k; ++p) {
                    double s = 0;
                    for (int j = 0; j < m; ++j) s += g[i * m + j] * bv[p * m + j];
                    ga[i * k + p] += s;
                }
        }
        if (tb) {
            ensure_grad(b.node());
            double* gb = b.node()->grad.data();
            const double* av = a.value().data();
            for (int p = 0; p < k; ++p)
                for (int i = 0; i < n; ++i) {
                    double x = av[i * k + p];
                    if (x == 0.0) continue;
                    for (int j = 0; j < m; ++j) gb[p * m + j] += x * g[i * m + j];
                }
        }
    });
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
    const int n = a.rows(), k = a.cols(), m = b.rows();
    Tensor out(n, m);
    const double* av = a.value().data();
    const double* bv = b.value().data();
    double* ov = out.value().data();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double s = 0;
            for (int p = 0; p < k; ++p) s += av[i * k + p] * bv[j * k + p];
            ov[i * m + j] = s;
        }
    bool ta = tracked(a), tb = tracked(b);
    record_if(ta || tb, out, [a, b, out, n, k, m, ta, tb]() mutable {
        const double* g = out.node()->grad.data();
        if (ta) {
            ensure_grad(a.node());
            double* ga = a.node()->grad.data();
            const double* bv = b.value().data();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double gij = g[i * m + j];
                    if (gij == 0.0) continue;
                    for (int p = 0; p < k; ++p) ga[i * k + p] += gij * bv[j * k + p];
                }
        }
        if (tb) {
            ensure_grad(b.node());
            double* gb = b.node()->grad.data();
            const double* av = a.value().data();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double gij = g[i * m + j];
                    if (gij == 0.0) continue;
                    for (int p = 0; p < k; ++p) gb[j * k + p] += gij * av[i * k + p];
                }
        }
    });
    return out;
}

namespace {

Tensor binary_same_shape(const char* name, const Tensor& a, const Tensor& b,
                         const std::function<double(double, double)>& fwd,
                         const std::function<void(const Tensor&, const Tensor&, const Tensor&, bool, bool)>& bwd) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(name, a, b);
    Tensor out(a.rows(), a.cols());
    for (size_t i = 0; i < out.value().size(); ++i) out.value()[i] = fwd(a.value()[i], b.value()[i]);
    bool ta = tracked(a), tb = tracked(b);
    record_if(ta || tb, out, [a, b, out, ta, tb, bwd]() { bwd(a, b, out, ta, tb); });
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_same_shape(
        "add", a, b, [](double x, double y) { return x + y; },
        [](const Tensor& a, const Tensor& b, const Tensor& out, bool ta, bool tb) {
            const auto& g = out.node()->grad;
            if (ta) {
                ensure_grad(a.node());
                for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i];
            }
            if (tb) {
                ensure_grad(b.node());
                for (size_t i = 0; i < g.size(); ++i) b.node()->grad[i] += g[i];
            }
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_same_shape(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](const Tensor& a, const Tensor& b, const Tensor& out, bool ta, bool tb) {
            const auto& g = out.node()->grad;
            if (ta) {
                ensure_grad(a.node());
                for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i];
            }
            if (tb) {
                ensure_grad(b.node());
                for (size_t i = 0; i < g.size(); ++i) b.node()->grad[i] -= g[i];
            }
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_same_shape(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](const Tensor& a, const Tensor& b, const Tensor& out, bool ta, bool tb) {
            const auto& g = out.node()->grad;
            if (ta) {
                ensure_grad(a.node());
                for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i] * b.value()[i];
            }
            if (tb) {
                ensure_grad(b.node());
                for (size_t i = 0; i < g.size(); ++i) b.node()->grad[i] += g[i] * a.value()[i];
            }
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_same_shape(
        "div", a, b, [](double x, double y) { return x / y; },
        [](const Tensor& a, const Tensor& b, const Tensor& out, bool ta, bool tb) {
            const auto& g = out.node()->grad;
            if (ta) {
                ensure_grad(a.node());
                for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i] / b.value()[i];
            }
            if (tb) {
                ensure_grad(b.node());
                for (size_t i = 0; i < g.size(); ++i) {
                    double bv = b.value()[i];
                    b.node()->grad[i] -= g[i] * a.value()[i] / (bv * bv);
                }
            }
        });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
    if (v.rows() != 1 || v.cols() != a.cols()) shape_error("add_rowvec", a, v);
    Tensor out(a.rows(), a.cols());
    const int n = a.rows(), m = a.cols();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.value()[i * m + j] = a.value()[i * m + j] + v.value()[j];
    bool ta = tracked(a), tv = tracked(v);
    record_if(ta || tv, out, [a, v, out, n, m, ta, tv]() {
        const auto& g = out.node()->grad;
        if (ta) {
            ensure_grad(a.node());
            for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i];
        }
        if (tv) {
            ensure_grad(v.node());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) v.node()->grad[j] += g[i * m + j];
        }
    });
    return out;
}

namespace {

Tensor unary(const char* /*name*/, const Tensor& a, const std::function<double(double)>& fwd,
             // dx contribution given (x, y, dy)
             const std::function<double(double, double, double)>& dbackward) {
    Tensor out(a.rows(), a.cols());
    for (size_t i = 0; i < out.value().size(); ++i) out.value()[i] = fwd(a.value()[i]);
    record_if(tracked(a), out, [a, out, dbackward]() {
        ensure_grad(a.node());
        const auto& g = out.node()->grad;
        for (size_t i = 0; i < g.size(); ++i)
            a.node()->grad[i] += dbackward(a.value()[i], out.value()[i], g[i]);
    });
    return out;
}

}  // namespace

Tensor scale(const Tensor& a, double s) {
    return unary("scale", a, [s](double x) { return s * x; },
                 [s](double, double, double dy) { return s * dy; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary("add_scalar", a, [s](double x) { return x + s; },
                 [](double, double, double dy) { return dy; });
}

Tensor mul_const(const Tensor& a, const Tensor& m) {
    if (a.rows() != m.rows() || a.cols() != m.cols()) shape_error("mul_const", a, m);
    Tensor out(a.rows(), a.cols());
    for (size_t i = 0; i < out.value().size(); ++i) out.value()[i] = a.value()[i] * m.value()[i];
    record_if(tracked(a), out, [a, m, out]() {
        ensure_grad(a.node());
        const auto& g = out.node()->grad;
        for (size_t i = 0; i < g.size(); ++i) a.node()->grad[i] += g[i] * m.value()[i];
    });
    return out;
}

Tensor sigmoid(const Tensor& a) {
    return unary("sigmoid", a,
                 [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
                 [](double, double y, double dy) { return dy * y * (1.0 - y); });
}

Tensor tanh_act(const Tensor& a) {
    return unary("tanh", a, [](double x) { return std::tanh(x); },
                 [](double, double y, double dy) { return dy * (1.0 - y * y); });
}

Tensor relu(const Tensor& a) {
    return unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
                 [](double x, double, double dy) { return x > 0 ? dy : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return unary("leaky_relu", a, [slope](double x) { return x > 0 ? x : slope * x; },
                 [slope](double x, double, double dy) { return x > 0 ? dy : slope * dy; });
}

Tensor exp_op(const Tensor& a) {
    return unary("exp", a, [](double x) { return std::exp(x); },
                 [](double, double y, double dy) { return dy * y; });
}

Tensor log_op(const Tensor& a) {
    return unary("log", a, [](double x) { return std::log(x); },
                 [](double x, double, double dy) { return dy / x; });
}

Tensor softplus(const Tensor& a) {
    return unary("softplus", a,
                 [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
                 [](double x, double, double dy) {
                     double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                     return dy * s;
                 });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary("clamp", a, [lo, hi](double x) { return std::min(hi, std::max(lo, x)); },
                 [lo, hi](double x, double, double dy) { return (x > lo && x < hi) ? dy : 0.0; });
}

Tensor row_softmax(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out(n, m);
    for (int i = 0; i < n; ++i) {
        const double* row = a.value().data() + static_cast<size_t>(i) * m;
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double z = 0;
        double* orow = out.value().data() + static_cast<size_t>(i) * m;
        for (int j = 0; j < m; ++j) {
            orow[j] = std::exp(row[j] - mx);
            z += orow[j];
        }
        for (int j = 0; j < m; ++j) orow[j] /= z;
    }
    record_if(tracked(a), out, [a, out, n, m]() {
        ensure_grad(a.node());
        const double* g = out.node()->grad.data();
        const double* y = out.value().data();
        double* ga = a.node()->grad.data();
        for (int i = 0; i < n; ++i) {
            double dot = 0;
            for (int j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
            for (int j = 0; j < m; ++j) ga[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
        }
    });
    return out;
}

Tensor row_log_sum_exp(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out(n, 1);
    for (int i = 0; i < n; ++i) {
        const double* row = a.value().data() + static_cast<size_t>(i) * m;
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double z = 0;
        for (int j = 0; j < m; ++j) z += std::exp(row[j] - mx);
        out.value()[i] = mx + std::log(z);
    }
    record_if(tracked(a), out, [a, out, n, m]() {
        ensure_grad(a.node());
        const double* g = out.node()->grad.data();
        double* ga = a.node()->grad.data();
        for (int i = 0; i < n; ++i) {
            double l = out.value()[i];
            for (int j = 0; j < m; ++j)
                ga[i * m + j] += g[i] * std::exp(a.value()[i * m + j] - l);
        }
    });
    return out;
}

Tensor row_l2_normalize(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    const double eps = 1e-12;
    Tensor out(n, m);
    std::vector<double> norms(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < m; ++j) {
            double x = a.value()[static_cast<size_t>(i) * m + j];
            s += x * x;
        }
        norms[i] = std::sqrt(s);
        double denom = norms[i] + eps;
        for (int j = 0; j < m; ++j)
            out.value()[static_cast<size_t>(i) * m + j] = a.value()[static_cast<size_t>(i) * m + j] / denom;
    }
    record_if(tracked(a), out, [a, out, n, m, norms]() {
        ensure_grad(a.node());
        const double eps = 1e-12;
        const double* g = out.node()->grad.data();
        const double* x = a.value().data();
        double* ga = a.node()->grad.data();
        for (int i = 0; i < n; ++i) {
            double nrm = norms[i];
            if (nrm == 0.0) continue;  // zero rows: zero subgradient
            double denom = nrm + eps;
            double dot = 0;
            for (int j = 0; j < m; ++j) dot += g[i * m + j] * x[i * m + j];
            for (int j = 0; j < m; ++j)
                ga[i * m + j] += g[i * m + j] / denom - x[i * m + j] * dot / (nrm * denom * denom);
        }
    });
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const int n = parts[0].rows();
    int total = 0;
    for (const auto& p : parts) {
        if (p.rows() != n)
            throw std::invalid_argument("concat_cols: block heights differ (" + std::to_string(p.rows()) + " vs " +
                                        std::to_string(n) + ")");
        total += p.cols();
    }
    Tensor out(n, total);
    int off = 0;
    bool any = false;
    for (const auto& p : parts) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p.cols(); ++j)
                out.value()[static_cast<size_t>(i) * total + off + j] = p.value()[static_cast<size_t>(i) * p.cols() + j];
        off += p.cols();
        any = any || tracked(p);
    }
    record_if(any, out, [parts, out, n, total]() {
        const double* g = out.node()->grad.data();
        int off = 0;
        for (const auto& p : parts) {
            if (p.requires_grad()) {
                ensure_grad(p.node());
                double* gp = p.node()->grad.data();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < p.cols(); ++j) gp[i * p.cols() + j] += g[i * total + off + j];
            }
            off += p.cols();
        }
    });
    return out;
}

Tensor slice_cols(const Tensor& a, int col_begin, int col_end) {
    if (col_begin < 0 || col_end > a.cols() || col_begin >= col_end)
        throw std::invalid_argument("slice_cols: bad range [" + std::to_string(col_begin) + "," +
                                    std::to_string(col_end) + ") for " + std::to_string(a.cols()) + " cols");
    const int n = a.rows(), m = a.cols(), w = col_end - col_begin;
    Tensor out(n, w);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j) out.value()[i * w + j] = a.value()[i * m + col_begin + j];
    record_if(tracked(a), out, [a, out, n, m, w, col_begin]() {
        ensure_grad(a.node());
        const double* g = out.node()->grad.data();
        double* ga = a.node()->grad.data();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) ga[i * m + col_begin + j] += g[i * w + j];
    });
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& rows) {
    const int m = a.cols();
    Tensor out(static_cast<int>(rows.size()), m);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= a.rows()) throw std::invalid_argument("gather_rows: index out of range");
        for (int j = 0; j < m; ++j) out.value()[i * m + j] = a.value()[static_cast<size_t>(rows[i]) * m + j];
    }
    record_if(tracked(a), out, [a, out, rows, m]() {
        ensure_grad(a.node());
        const double* g = out.node()->grad.data();
        double* ga = a.node()->grad.data();
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < m; ++j) ga[static_cast<size_t>(rows[i]) * m + j] += g[i * m + j];
    });
    return out;
}

Tensor select_cols(const Tensor& a, const std::vector<int>& col_of_row) {
    if (static_cast<int>(col_of_row.size()) != a.rows())
        throw std::invalid_argument("select_cols: need one column index per row");
    const int m = a.cols();
    Tensor out(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) {
        if (col_of_row[i] < 0 || col_of_row[i] >= m) throw std::invalid_argument("select_cols: index out of range");
        out.value()[i] = a.value()[static_cast<size_t>(i) * m + col_of_row[i]];
    }
    record_if(tracked(a), out, [a, out, col_of_row, m]() {
        ensure_grad(a.node());
        const double* g = out.node()->grad.data();
        double* ga = a.node()->grad.data();
        for (int i = 0; i < a.rows(); ++i) ga[static_cast<size_t>(i) * m + col_of_row[i]] += g[i];
    });
    return out;
}

Tensor sum(const Tensor& a) {
    Tensor out(1, 1);
    double s = 0;
    for (double x : a.value()) s += x;
    out.value()[0] = s;
    record_if(tracked(a), out, [a, out]() {
        ensure_grad(a.node());
        double g = out.node()->grad[0];
        for (auto& x : a.node()->grad) x += g;
    });
    return out;
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw std::invalid_argument("mean: empty tensor");
    Tensor out(1, 1);
    double s = 0;
    for (double x : a.value()) s += x;
    out.value()[0] = s / static_cast<double>(a.size());
    record_if(tracked(a), out, [a, out]() {
        ensure_grad(a.node());
        double g = out.node()->grad[0] / static_cast<double>(a.size());
        for (auto& x : a.node()->grad) x += g;
    });
    return out;
}

// ---- optimizer ----------------------------------------------------------------

OptimizerState::Moments& OptimizerState::moments_for(detail::Node* node, size_t size) {
    for (auto& [ptr, m] : moments)
        if (ptr == node) return m;
    moments.push_back({node, Moments{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)}});
    return moments.back().second;
}

void optimizer_step(std::vector<Tensor>& params, OptimizerState& state) {
    for (auto& p : params)
        if (!p.has_grad())
            throw std::logic_error("optimizer_step: parameter has no gradient (did backward run?)");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (auto& p : params) {
        auto& mom = state.moments_for(p.node(), p.value().size());
        auto& val = p.value();
        auto& g = p.grad();
        for (size_t i = 0; i < val.size(); ++i) {
            mom.m[i] = state.beta1 * mom.m[i] + (1.0 - state.beta1) * g[i];
            mom.v[i] = state.beta2 * mom.v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            val[i] -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) + state.weight_decay * val[i]);
        }
    }
    zero_grads(params);
}

void zero_grads(std::vector<Tensor>& params) {
    for (auto& p : params) p.zero_grad();
}

}  // namespace fediih
