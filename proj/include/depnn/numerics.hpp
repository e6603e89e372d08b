#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depnn/error.hpp"

namespace depnn {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;

template <typename MatDerived, typename VecDerived>
auto matvec(const Eigen::MatrixBase<MatDerived>& m, const Eigen::MatrixBase<VecDerived>& v) {
    if (m.cols() != v.rows() || v.cols() != 1) {
        throw ShapeMismatch("matvec: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            " times " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
    }
    using Scalar = typename MatDerived::Scalar;
    VectorT<Scalar> out = m * v;
    return out;
}

template <typename Derived>
auto tanh_forward(const Eigen::MatrixBase<Derived>& v) {
    return v.array().tanh().matrix().eval();
}

/// Gradient through y = tanh(x) given the forward output y.
template <typename YDerived, typename UDerived>
auto tanh_backward(const Eigen::MatrixBase<YDerived>& y, const Eigen::MatrixBase<UDerived>& upstream) {
    return (upstream.array() * (1 - y.array().square())).matrix().eval();
}

/// Max-subtracted exponential normalization.
template <typename Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    VectorT<Scalar> e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return (e / e.sum()).eval();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

/// Cosine similarity; throws ZeroVector if either side has zero norm.
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw ZeroVector("cosine similarity of a zero vector");
    }
    return a.dot(b) / (na * nb);
}

enum class InitKind {
    Xavier,     ///< uniform in +-sqrt(6 / (fan_in + fan_out))
    Zero,
    Embedding,  ///< uniform in +-0.01
};

enum class DType { F64, F32 };

/// Named dense tensors with paired gradient buffers.
///
/// Gradients are accumulated in place. Parameters marked `sparse_columns`
/// (embedding tables, one column per entry) track which columns were touched
/// so an SGD step only visits those columns.
template <typename Scalar>
class BasicParameterStore {
public:
    using Mat = MatrixT<Scalar>;

    struct Parameter {
        Mat value;
        Mat grad;
        InitKind init = InitKind::Xavier;
        bool sparse_columns = false;
        bool touched = false;
        std::set<Eigen::Index> touched_cols;

        /// Gradient column `c` of a sparse parameter, marking it touched.
        auto grad_col(Eigen::Index c) {
            touched = true;
            if (sparse_columns) {
                touched_cols.insert(c);
            }
            return grad.col(c);
        }
        Mat& grad_dense() {
            touched = true;
            if (sparse_columns) {
                for (Eigen::Index c = 0; c < grad.cols(); ++c) {
                    touched_cols.insert(c);
                }
            }
            return grad;
        }
    };

    Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols, InitKind init,
                   bool sparse_columns = false) {
        auto [it, inserted] = params_.try_emplace(name);
        if (!inserted) {
            throw std::logic_error("parameter '" + name + "' registered twice");
        }
        auto& p = it->second;
        p.value = Mat::Zero(rows, cols);
        p.grad = Mat::Zero(rows, cols);
        p.init = init;
        p.sparse_columns = sparse_columns;
        return p;
    }

    bool contains(const std::string& name) const { return params_.contains(name); }

    Parameter& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) {
            throw std::out_of_range("unknown parameter '" + name + "'");
        }
        return it->second;
    }
    const Parameter& at(const std::string& name) const {
        return const_cast<BasicParameterStore*>(this)->at(name);
    }
    const Mat& value(const std::string& name) const { return at(name).value; }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    std::size_t size() const noexcept { return params_.size(); }

    void zero_grad() {
        for (auto& [name, p] : params_) {
            clear_gradient(p);
        }
    }

    /// theta <- theta - rate * grad on touched entries, then clears gradients.
    void sgd_step(Scalar rate) {
        for (auto& [name, p] : params_) {
            if (!p.touched) {
                continue;
            }
            if (p.sparse_columns) {
                for (auto c : p.touched_cols) {
                    p.value.col(c) -= rate * p.grad.col(c);
                }
            } else {
                p.value -= rate * p.grad;
            }
            clear_gradient(p);
        }
    }

    bool operator==(const BasicParameterStore& other) const {
        if (params_.size() != other.params_.size()) {
            return false;
        }
        for (const auto& [name, p] : params_) {
            auto it = other.params_.find(name);
            if (it == other.params_.end() || p.value.rows() != it->second.value.rows() ||
                p.value.cols() != it->second.value.cols() || p.value != it->second.value) {
                return false;
            }
        }
        return true;
    }

private:
    static void clear_gradient(Parameter& p) {
        if (!p.touched) {
            return;
        }
        if (p.sparse_columns) {
            for (auto c : p.touched_cols) {
                p.grad.col(c).setZero();
            }
            p.touched_cols.clear();
        } else {
            p.grad.setZero();
        }
        p.touched = false;
    }

    std::map<std::string, Parameter> params_;
};

using ParameterStore = BasicParameterStore<double>;

/// Fills every registered tensor according to its InitKind. Deterministic in
/// `seed`; tensors are visited in name order.
template <typename Scalar>
void init_uniform(BasicParameterStore<Scalar>& store, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& [name, p] : store) {
        Scalar bound = 0;
        switch (p.init) {
        case InitKind::Zero:
            p.value.setZero();
            continue;
        case InitKind::Embedding:
            bound = Scalar(0.01);
            break;
        case InitKind::Xavier:
            bound = std::sqrt(Scalar(6) / Scalar(p.value.rows() + p.value.cols()));
            break;
        }
        std::uniform_real_distribution<Scalar> dist(-bound, bound);
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
            for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
                p.value(i, j) = dist(rng);
            }
        }
    }
}

struct GradientCheckOptions {
    double epsilon = 1e-5;
    /// Entries checked per tensor; 0 checks every entry.
    std::size_t max_entries_per_tensor = 0;
    std::uint64_t seed = 7;
    /// Denominator floor for the relative error. Central differences of an
    /// O(1) loss at epsilon 1e-5 carry ~1e-10 absolute roundoff, so smaller
    /// gradients are judged on absolute error (floor * tolerance) instead.
    double scale_floor = 1e-5;
};

struct TensorCheck {
    std::string name;
    std::size_t entries_checked = 0;
    double max_relative_error = 0.0;
    double max_abs_error = 0.0;
};

struct GradientCheckReport {
    std::vector<TensorCheck> tensors;

    double worst() const {
        double w = 0.0;
        for (const auto& t : tensors) {
            w = std::max(w, t.max_relative_error);
        }
        return w;
    }
};

/// Compares the analytic gradients currently held in `store` against central
/// differences of `loss`. `loss` must read parameter values from `store`.
/// Relative error per entry: |a - n| / max(|a|, |n|, scale_floor).
GradientCheckReport gradient_check(const std::function<double()>& loss, ParameterStore& store,
                                   const GradientCheckOptions& options = {});

/// Tensor section of a DEPNN1 file: a plain-text manifest (name, shape,
/// dtype, byte offset) terminated by "end", followed by little-endian
/// row-major payload.
void write_tensors(std::ostream& out, const ParameterStore& store, DType dtype);
/// Reads values into already-registered tensors; every manifest name must exist with matching shape.
void read_tensors(std::istream& in, ParameterStore& store);

} // namespace depnn
