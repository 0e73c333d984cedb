#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fediih/rng.hpp"

namespace fediih {

// Dense row-major matrix of 64-bit reals with optional gradient buffer.
// Tensors are cheap handles; copying shares the underlying storage.
//
// Gradient recording: while a Tape is active on the current thread, every
// primitive whose inputs participate in differentiation appends a backward
// closure to it. backward() replays the closures in reverse and consumes
// the tape.

namespace detail {
struct Node {
    int rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily
    bool requires_grad = false;
};
}  // namespace detail

class Tensor {
public:
    Tensor() : node_(std::make_shared<detail::Node>()) {}
    Tensor(int rows, int cols);

    static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
    static Tensor full(int rows, int cols, double v);
    static Tensor from(int rows, int cols, std::vector<double> data);
    static Tensor randn(int rows, int cols, Rng& rng, double stddev = 1.0);
    // Glorot/Xavier uniform in [-s, s], s = sqrt(6/(fan_in+fan_out)).
    static Tensor glorot(int rows, int cols, Rng& rng);

    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    long size() const { return static_cast<long>(node_->rows) * node_->cols; }

    const std::vector<double>& value() const { return node_->value; }
    std::vector<double>& value() { return node_->value; }
    double at(int r, int c) const { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }
    void set(int r, int c, double v) { node_->value[static_cast<size_t>(r) * node_->cols + c] = v; }
    double scalar() const;  // value of a 1x1 tensor

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool flag);
    bool has_grad() const { return !node_->grad.empty(); }
    std::vector<double>& grad();
    void zero_grad();

    bool same_storage(const Tensor& other) const { return node_ == other.node_; }
    detail::Node* node() const { return node_.get(); }

private:
    std::shared_ptr<detail::Node> node_;
    friend class Tape;
};

// Recording context for reverse-mode differentiation. Activates itself on
// the current thread for its lifetime; one tape per simulated client.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Runs reverse accumulation from a scalar loss and clears the record.
    void backward(const Tensor& loss);

    size_t op_count() const { return entries_.size(); }

    static Tape* current();
    static void record(Tensor output, std::function<void()> backward_fn);

private:
    struct Entry {
        std::shared_ptr<detail::Node> output;
        std::function<void()> backward_fn;
    };
    std::vector<Entry> entries_;
    Tape* previous_ = nullptr;
};

// ---- primitive suite ------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);     // (n,k)·(k,m)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (n,k)·(m,k)^T -> (n,m)
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& a, const Tensor& v);  // (n,m) + (1,m)
Tensor mul(const Tensor& a, const Tensor& b);         // elementwise
Tensor div(const Tensor& a, const Tensor& b);         // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_const(const Tensor& a, const Tensor& m);  // elementwise by constant mask
Tensor sigmoid(const Tensor& a);
Tensor tanh_act(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor exp_op(const Tensor& a);
Tensor log_op(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor row_softmax(const Tensor& a);
Tensor row_log_sum_exp(const Tensor& a);  // (n,m) -> (n,1)
// Row-wise v/(||v||+1e-12). Exact zero rows map to zero rows and receive
// zero gradient.
Tensor row_l2_normalize(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, int col_begin, int col_end);
Tensor gather_rows(const Tensor& a, const std::vector<int>& rows);
Tensor select_cols(const Tensor& a, const std::vector<int>& col_of_row);  // (n,m) -> (n,1)
Tensor sum(const Tensor& a);   // -> (1,1)
Tensor mean(const Tensor& a);  // -> (1,1)

// ---- optimizer -------------------------------------------------------------

// Adam with decoupled weight decay. Moment buffers are keyed by parameter
// storage and created on first use.
struct OptimizerState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    long step = 0;

    struct Moments {
        std::vector<double> m, v;
    };
    std::vector<std::pair<detail::Node*, Moments>> moments;
    Moments& moments_for(detail::Node* node, size_t size);
};

// Applies one update to every parameter and zeroes the gradients.
// Throws if a parameter has no populated gradient buffer.
void optimizer_step(std::vector<Tensor>& params, OptimizerState& state);
void zero_grads(std::vector<Tensor>& params);

}  // namespace fediih
