#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swx {

// Thrown when a caller breaks an API precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Thrown when a computation produces NaN/Inf or hits a singular denominator.
struct NumericFailure : std::runtime_error {
    explicit NumericFailure(const std::string& op, const std::string& what)
        : std::runtime_error("numeric failure in '" + op + "': " + what), op_name(op) {}
    std::string op_name;
};

// Thrown when an input lies outside an operation's mathematical domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; invalid when default-constructed.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode differentiation tape over dense real arrays (double precision).
//
// Every node holds a flat value array. Matrices are stored row-major and the
// structural ops (matmul, slice, concat) carry explicit dimensions. The graph
// is append-only, so creation order is a topological order and the backward
// sweep is a single reverse pass.
class Tape {
public:
    explicit Tape(bool check_finite =
#ifdef NDEBUG
                      false
#else
                      true
#endif
                  )
        : check_finite_(check_finite) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // --- graph construction ---------------------------------------------
    Var input(std::vector<double> value, bool requires_grad = false);
    Var constant(double x) { return input({x}, false); }
    Var constant_vec(std::vector<double> v) { return input(std::move(v), false); }

    // elementwise binary (same length)
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var maximum(Var a, Var b);
    Var neg(Var a);

    // broadcast: scalar node applied across a vector node
    Var smul(Var scalar, Var vec);

    // constants folded in
    Var add_const(Var a, double c);
    Var scale_const(Var a, double c);

    // elementwise unary
    Var tanh_(Var a);
    Var tan_(Var a);
    Var atan_(Var a);
    Var atanh_(Var a);
    Var exp_(Var a);
    Var log_(Var a);
    Var softplus_(Var a);
    Var relu_(Var a);
    Var sin_(Var a);
    Var cos_(Var a);

    Var softmax_(Var a);

    // reductions
    Var dot(Var a, Var b);
    Var norm(Var a);  // L2
    Var sum(Var a);

    // structure
    Var matmul(Var a, int ra, int ca, Var b, int cb);
    Var matvec(Var w, int rows, int cols, Var x) { return matmul(w, rows, cols, x, 1); }
    Var concat(std::span<const Var> parts);
    Var concat(std::initializer_list<Var> parts) {
        return concat(std::span<const Var>(parts.begin(), parts.size()));
    }
    Var slice(Var a, int start, int len);
    Var even(Var a);  // entries 0,2,4,...
    Var odd(Var a);   // entries 1,3,5,...
    Var interleave(Var a, Var b);

    // --- access -----------------------------------------------------------
    const std::vector<double>& value(Var v) const { return node(v).val; }
    double scalar_value(Var v) const;
    int size(Var v) const { return static_cast<int>(node(v).val.size()); }
    bool requires_grad(Var v) const { return node(v).requires_grad; }

    // Runs the reverse sweep from a scalar root. Gradients of leaf inputs are
    // then available through grad(). May be called once per tape.
    void backward(Var root);
    const std::vector<double>& grad(Var v) const;

    std::size_t num_nodes() const { return nodes_.size(); }
    bool checking_finite() const { return check_finite_; }
    void set_check_finite(bool on) { check_finite_ = on; }

private:
    struct Node {
        std::vector<double> val;
        std::vector<double> grad;  // sized lazily during backward
        bool requires_grad = false;
        const char* op = "input";
        std::function<void(Tape&)> back;  // accumulates into parents
    };

    Node& node(Var v) {
        if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
            throw ContractViolation("Var does not belong to this tape");
        return nodes_[static_cast<std::size_t>(v.id)];
    }
    const Node& node(Var v) const { return const_cast<Tape*>(this)->node(v); }

    Var push(std::vector<double> val, const char* op, bool requires_grad,
             std::function<void(Tape&)> back);
    void accumulate(int id, std::span<const double> g);
    void accumulate_at(int id, int index, double g);
    std::vector<double>& grad_buf(int id);
    void check(const std::vector<double>& v, const char* op) const;

    Var unary(Var a, const char* name, double (*f)(double), double (*df)(double, double));

    std::vector<Node> nodes_;
    bool check_finite_;
    bool backward_done_ = false;

    friend struct GradAccess;
};

using GradMap = std::map<std::string, std::vector<double>>;

// Gradient of a scalar loss with respect to every named parameter.
// Parameters not reachable from the root get zero arrays of matching size.
GradMap forward_backward(Var loss_root, const std::map<std::string, Var>& params);

// --- finite-difference gradient checking ----------------------------------

struct GradCheckResult {
    double max_rel_err = 0.0;
    bool conclusive = true;
};

// Builds a scalar from input Vars; the same builder is reused for perturbed
// evaluations, so it must be a pure function of the inputs.
using DiffFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central-difference check of the tape gradient at one point.
// Relative error per coordinate: |analytic - cd| / max(1, |cd|).
GradCheckResult grad_check(const DiffFn& f, const std::vector<std::vector<double>>& inputs,
                           double eps = 1e-6);

// Repeats grad_check with freshly sampled inputs when the error exceeds tol
// (the op may have been hit at a kink); inconclusive after max_resample tries.
GradCheckResult grad_check_random(
    const DiffFn& f, const std::function<std::vector<std::vector<double>>()>& sampler,
    double eps = 1e-6, double tol = 1e-4, int max_resample = 10);

}  // namespace swx
