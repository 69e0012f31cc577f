#include "graph.hpp"

#include <cmath>
#include <string>

namespace minv {

namespace {

Tensor zeros_like(const Tensor& t) {
    if (t.rank() == 0) return Tensor::scalar(0.0);
    return Tensor(t.shape());
}

void accum(Tensor& dst, const Tensor& src) {
    if (dst.empty()) {
        dst = src;
    } else {
        axpy(1.0, src, dst);
    }
}

void accum_scaled(Tensor& dst, double c, const Tensor& src) {
    if (dst.empty()) {
        dst = scale(src, c);
    } else {
        axpy(c, src, dst);
    }
}

double abs_pow_grad(double x, int p) {
    if (x == 0.0) return 0.0;
    double s = x > 0.0 ? 1.0 : -1.0;
    return p * std::pow(std::abs(x), p - 1) * s;
}

// derivative of abs_pow_grad; 0 at the kink for p == 1
double abs_pow_grad2(double x, int p) {
    if (p == 1) return 0.0;
    if (p == 2) return 2.0;
    if (x == 0.0) return 0.0;
    return static_cast<double>(p) * (p - 1) * std::pow(std::abs(x), p - 2);
}

} // namespace

void softmax_rows_inplace(Tensor& m) {
    require(m.rank() == 2, Errc::shape_mismatch, "softmax: expects 2-D tensor");
    const std::size_t r = m.rows(), c = m.cols();
    auto d = m.data();
    for (std::size_t i = 0; i < r; ++i) {
        double* row = d.data() + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            row[j] = std::exp(row[j] - mx);
            s += row[j];
        }
        for (std::size_t j = 0; j < c; ++j) row[j] /= s;
    }
}

Tensor softmax_rows(const Tensor& m) {
    Tensor out = m;
    softmax_rows_inplace(out);
    return out;
}

const char* Graph::op_name(OpKind k) {
    switch (k) {
        case OpKind::leaf: return "leaf";
        case OpKind::constant: return "constant";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::mul: return "mul";
        case OpKind::neg: return "neg";
        case OpKind::scale: return "scale";
        case OpKind::rsub: return "rsub";
        case OpKind::add_scalar: return "add_scalar";
        case OpKind::matmul: return "matmul";
        case OpKind::add_row: return "add_row";
        case OpKind::relu: return "relu";
        case OpKind::sigmoid: return "sigmoid";
        case OpKind::tanh_fn: return "tanh";
        case OpKind::log_fn: return "log";
        case OpKind::clamp_min: return "clamp_min";
        case OpKind::sum_all: return "sum";
        case OpKind::mean_all: return "mean";
        case OpKind::softmax_ce: return "softmax_ce";
        case OpKind::lp_sum: return "lp_sum";
    }
    return "?";
}

Value Graph::push(Node n) {
    if (!n.val.all_finite())
        raise(Errc::numeric, std::string("non-finite value in node #") +
                                 std::to_string(nodes_.size()) + " (" + op_name(n.op) + ")");
    nodes_.push_back(std::move(n));
    return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::tangent(Value v) const {
    require(tangent_mode_, Errc::invalid_argument, "graph has no tangent direction");
    return nodes_[v.id].tan;
}

Value Graph::leaf(Tensor v) {
    Node n;
    n.op = OpKind::leaf;
    if (tangent_mode_) n.tan = zeros_like(v);
    n.val = std::move(v);
    return push(std::move(n));
}

Value Graph::leaf(Tensor v, Tensor tangent) {
    require(v.same_shape(tangent), Errc::shape_mismatch, "leaf tangent shape mismatch");
    if (!tangent_mode_) {
        // retrofit zero tangents onto already-created inputs; ops must not
        // precede the directional leaf
        for (auto& existing : nodes_) {
            require(existing.op == OpKind::leaf || existing.op == OpKind::constant,
                    Errc::invalid_argument,
                    "tangent leaf must be created before any graph operations");
            existing.tan = zeros_like(existing.val);
        }
        tangent_mode_ = true;
    }
    Node n;
    n.op = OpKind::leaf;
    n.val = std::move(v);
    n.tan = std::move(tangent);
    return push(std::move(n));
}

Value Graph::constant(Tensor v) {
    Node n;
    n.op = OpKind::constant;
    if (tangent_mode_) n.tan = zeros_like(v);
    n.val = std::move(v);
    return push(std::move(n));
}

Value Graph::add(Value a, Value b) {
    Node n;
    n.op = OpKind::add;
    n.a = a.id;
    n.b = b.id;
    n.val = minv::add(nodes_[a.id].val, nodes_[b.id].val);
    if (tangent_mode_) n.tan = minv::add(nodes_[a.id].tan, nodes_[b.id].tan);
    return push(std::move(n));
}

Value Graph::sub(Value a, Value b) {
    Node n;
    n.op = OpKind::sub;
    n.a = a.id;
    n.b = b.id;
    n.val = minv::sub(nodes_[a.id].val, nodes_[b.id].val);
    if (tangent_mode_) n.tan = minv::sub(nodes_[a.id].tan, nodes_[b.id].tan);
    return push(std::move(n));
}

Value Graph::mul(Value a, Value b) {
    Node n;
    n.op = OpKind::mul;
    n.a = a.id;
    n.b = b.id;
    n.val = minv::mul(nodes_[a.id].val, nodes_[b.id].val);
    if (tangent_mode_)
        n.tan = minv::add(minv::mul(nodes_[a.id].tan, nodes_[b.id].val),
                          minv::mul(nodes_[a.id].val, nodes_[b.id].tan));
    return push(std::move(n));
}

Value Graph::neg(Value a) {
    Node n;
    n.op = OpKind::neg;
    n.a = a.id;
    n.val = minv::scale(nodes_[a.id].val, -1.0);
    if (tangent_mode_) n.tan = minv::scale(nodes_[a.id].tan, -1.0);
    return push(std::move(n));
}

Value Graph::scale(Value a, double c) {
    Node n;
    n.op = OpKind::scale;
    n.a = a.id;
    n.c = c;
    n.val = minv::scale(nodes_[a.id].val, c);
    if (tangent_mode_) n.tan = minv::scale(nodes_[a.id].tan, c);
    return push(std::move(n));
}

Value Graph::rsub(double c, Value a) {
    Node n;
    n.op = OpKind::rsub;
    n.a = a.id;
    n.c = c;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v = c - v;
    if (tangent_mode_) n.tan = minv::scale(nodes_[a.id].tan, -1.0);
    return push(std::move(n));
}

Value Graph::add_scalar(Value a, double c) {
    Node n;
    n.op = OpKind::add_scalar;
    n.a = a.id;
    n.c = c;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v += c;
    if (tangent_mode_) n.tan = nodes_[a.id].tan;
    return push(std::move(n));
}

Value Graph::matmul(Value a, Value b) {
    Node n;
    n.op = OpKind::matmul;
    n.a = a.id;
    n.b = b.id;
    n.val = minv::matmul(nodes_[a.id].val, nodes_[b.id].val);
    if (tangent_mode_)
        n.tan = minv::add(minv::matmul(nodes_[a.id].tan, nodes_[b.id].val),
                          minv::matmul(nodes_[a.id].val, nodes_[b.id].tan));
    return push(std::move(n));
}

Value Graph::add_row(Value m, Value row) {
    Node n;
    n.op = OpKind::add_row;
    n.a = m.id;
    n.b = row.id;
    n.val = minv::add_rowvec(nodes_[m.id].val, nodes_[row.id].val);
    if (tangent_mode_) n.tan = minv::add_rowvec(nodes_[m.id].tan, nodes_[row.id].tan);
    return push(std::move(n));
}

Value Graph::relu(Value a) {
    Node n;
    n.op = OpKind::relu;
    n.a = a.id;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v = v > 0.0 ? v : 0.0;
    if (tangent_mode_) {
        n.tan = nodes_[a.id].tan;
        auto av = nodes_[a.id].val.data();
        auto td = n.tan.data();
        for (std::size_t i = 0; i < td.size(); ++i)
            if (av[i] <= 0.0) td[i] = 0.0;
    }
    return push(std::move(n));
}

Value Graph::sigmoid(Value a) {
    Node n;
    n.op = OpKind::sigmoid;
    n.a = a.id;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    if (tangent_mode_) {
        n.tan = nodes_[a.id].tan;
        auto sv = n.val.data();
        auto td = n.tan.data();
        for (std::size_t i = 0; i < td.size(); ++i) td[i] *= sv[i] * (1.0 - sv[i]);
    }
    return push(std::move(n));
}

Value Graph::tanh(Value a) {
    Node n;
    n.op = OpKind::tanh_fn;
    n.a = a.id;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v = std::tanh(v);
    if (tangent_mode_) {
        n.tan = nodes_[a.id].tan;
        auto yv = n.val.data();
        auto td = n.tan.data();
        for (std::size_t i = 0; i < td.size(); ++i) td[i] *= 1.0 - yv[i] * yv[i];
    }
    return push(std::move(n));
}

Value Graph::log(Value a) {
    Node n;
    n.op = OpKind::log_fn;
    n.a = a.id;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v = std::log(v);
    if (tangent_mode_) {
        n.tan = nodes_[a.id].tan;
        auto av = nodes_[a.id].val.data();
        auto td = n.tan.data();
        for (std::size_t i = 0; i < td.size(); ++i) td[i] /= av[i];
    }
    return push(std::move(n));
}

Value Graph::clamp_min(Value a, double lo) {
    Node n;
    n.op = OpKind::clamp_min;
    n.a = a.id;
    n.c = lo;
    n.val = nodes_[a.id].val;
    for (double& v : n.val.data()) v = v > lo ? v : lo;
    if (tangent_mode_) {
        n.tan = nodes_[a.id].tan;
        auto av = nodes_[a.id].val.data();
        auto td = n.tan.data();
        for (std::size_t i = 0; i < td.size(); ++i)
            if (av[i] <= lo) td[i] = 0.0;
    }
    return push(std::move(n));
}

Value Graph::sum(Value a) {
    Node n;
    n.op = OpKind::sum_all;
    n.a = a.id;
    n.val = Tensor::scalar(nodes_[a.id].val.sum());
    if (tangent_mode_) n.tan = Tensor::scalar(nodes_[a.id].tan.sum());
    return push(std::move(n));
}

Value Graph::mean(Value a) {
    Node n;
    n.op = OpKind::mean_all;
    n.a = a.id;
    const double inv = 1.0 / static_cast<double>(nodes_[a.id].val.size());
    n.val = Tensor::scalar(nodes_[a.id].val.sum() * inv);
    if (tangent_mode_) n.tan = Tensor::scalar(nodes_[a.id].tan.sum() * inv);
    return push(std::move(n));
}

Value Graph::softmax_ce(Value logits, Tensor targets) {
    const Tensor& z = nodes_[logits.id].val;
    require(z.rank() == 2 && targets.same_shape(z), Errc::shape_mismatch,
            "softmax_ce: logits and one-hot targets must be matching 2-D tensors");
    const std::size_t r = z.rows(), c = z.cols();

    Node n;
    n.op = OpKind::softmax_ce;
    n.a = logits.id;
    n.aux = softmax_rows(z);

    double total = 0.0;
    auto zd = z.data();
    auto td = targets.data();
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = zd.data() + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double se = 0.0;
        for (std::size_t j = 0; j < c; ++j) se += std::exp(row[j] - mx);
        double lse = mx + std::log(se);
        double zy = 0.0;
        for (std::size_t j = 0; j < c; ++j) zy += row[j] * td[i * c + j];
        total += lse - zy;
    }
    n.val = Tensor::scalar(total / static_cast<double>(r));

    if (tangent_mode_) {
        const Tensor& zt = nodes_[logits.id].tan;
        auto ztd = zt.data();
        auto sd = n.aux.data();
        n.aux_tan = Tensor({r, c});
        auto std_ = n.aux_tan.data();
        double tdot = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            double sz = 0.0;
            for (std::size_t j = 0; j < c; ++j) sz += sd[i * c + j] * ztd[i * c + j];
            for (std::size_t j = 0; j < c; ++j) {
                std_[i * c + j] = sd[i * c + j] * (ztd[i * c + j] - sz);
                tdot += (sd[i * c + j] - td[i * c + j]) * ztd[i * c + j];
            }
        }
        n.tan = Tensor::scalar(tdot / static_cast<double>(r));
    }
    n.targets = std::move(targets);
    return push(std::move(n));
}

Value Graph::lp_sum(Value a, int p) {
    require(p >= 1 && p <= 6, Errc::invalid_argument,
            "lp_sum: norm order must be in [1,6], got " + std::to_string(p));
    Node n;
    n.op = OpKind::lp_sum;
    n.a = a.id;
    n.ip = p;
    double s = 0.0;
    for (double v : nodes_[a.id].val.data()) s += std::pow(std::abs(v), p);
    n.val = Tensor::scalar(s);
    if (tangent_mode_) {
        double st = 0.0;
        auto av = nodes_[a.id].val.data();
        auto at = nodes_[a.id].tan.data();
        for (std::size_t i = 0; i < av.size(); ++i) st += abs_pow_grad(av[i], p) * at[i];
        n.tan = Tensor::scalar(st);
    }
    return push(std::move(n));
}

Tensor Graph::grad_of(Value loss, Value leaf) {
    Value leaves[] = {leaf};
    return grad(loss, leaves)[0];
}

std::vector<Tensor> Graph::grad(Value loss, std::span<const Value> leaves) {
    require(nodes_[loss.id].val.size() == 1, Errc::invalid_argument,
            "grad: loss must be a scalar, got shape " + nodes_[loss.id].val.shape_str());
    std::vector<Tensor> adj(nodes_.size()), adjt;
    backward(loss, adj, adjt, false);
    std::vector<Tensor> out;
    out.reserve(leaves.size());
    for (Value v : leaves) {
        Tensor g = adj[v.id].empty() ? zeros_like(nodes_[v.id].val) : std::move(adj[v.id]);
        require(g.all_finite(), Errc::numeric, "grad: non-finite gradient for leaf");
        out.push_back(std::move(g));
    }
    return out;
}

Graph::DualGrad Graph::grad_dual(Value loss, std::span<const Value> leaves) {
    require(tangent_mode_, Errc::invalid_argument, "grad_dual: graph has no tangent direction");
    require(nodes_[loss.id].val.size() == 1, Errc::invalid_argument,
            "grad_dual: loss must be a scalar");
    std::vector<Tensor> adj(nodes_.size()), adjt(nodes_.size());
    backward(loss, adj, adjt, true);
    DualGrad out;
    for (Value v : leaves) {
        Tensor g = adj[v.id].empty() ? zeros_like(nodes_[v.id].val) : std::move(adj[v.id]);
        Tensor gd = adjt[v.id].empty() ? zeros_like(nodes_[v.id].val) : std::move(adjt[v.id]);
        require(g.all_finite() && gd.all_finite(), Errc::numeric,
                "grad_dual: non-finite gradient for leaf");
        out.grad.push_back(std::move(g));
        out.grad_dot.push_back(std::move(gd));
    }
    return out;
}

void Graph::backward(Value loss, std::vector<Tensor>& adj, std::vector<Tensor>& adjt,
                     bool dual) const {
    adj[loss.id] = Tensor::scalar(1.0);
    if (dual) adjt[loss.id] = Tensor::scalar(0.0);

    // creation order is topological; one reverse visit per node
    for (std::size_t idx = loss.id + 1; idx-- > 0;) {
        if (adj[idx].empty() && (!dual || adjt[idx].empty())) continue;
        if (dual) {
            if (adj[idx].empty()) adj[idx] = zeros_like(adjt[idx]);
            if (adjt[idx].empty()) adjt[idx] = zeros_like(adj[idx]);
        }
        const Node& n = nodes_[idx];
        const Tensor& g = adj[idx];
        const Tensor* gt = dual ? &adjt[idx] : nullptr;

        switch (n.op) {
            case OpKind::leaf:
            case OpKind::constant:
                break;

            case OpKind::add:
                accum(adj[n.a], g);
                accum(adj[n.b], g);
                if (dual) {
                    accum(adjt[n.a], *gt);
                    accum(adjt[n.b], *gt);
                }
                break;

            case OpKind::sub:
                accum(adj[n.a], g);
                accum_scaled(adj[n.b], -1.0, g);
                if (dual) {
                    accum(adjt[n.a], *gt);
                    accum_scaled(adjt[n.b], -1.0, *gt);
                }
                break;

            case OpKind::mul: {
                const Node& pa = nodes_[n.a];
                const Node& pb = nodes_[n.b];
                accum(adj[n.a], minv::mul(g, pb.val));
                accum(adj[n.b], minv::mul(g, pa.val));
                if (dual) {
                    accum(adjt[n.a], minv::add(minv::mul(*gt, pb.val), minv::mul(g, pb.tan)));
                    accum(adjt[n.b], minv::add(minv::mul(*gt, pa.val), minv::mul(g, pa.tan)));
                }
                break;
            }

            case OpKind::neg:
            case OpKind::rsub:
                accum_scaled(adj[n.a], -1.0, g);
                if (dual) accum_scaled(adjt[n.a], -1.0, *gt);
                break;

            case OpKind::scale:
                accum_scaled(adj[n.a], n.c, g);
                if (dual) accum_scaled(adjt[n.a], n.c, *gt);
                break;

            case OpKind::add_scalar:
                accum(adj[n.a], g);
                if (dual) accum(adjt[n.a], *gt);
                break;

            case OpKind::matmul: {
                const Node& pa = nodes_[n.a];
                const Node& pb = nodes_[n.b];
                accum(adj[n.a], matmul_bt(g, pb.val));
                accum(adj[n.b], matmul_at(pa.val, g));
                if (dual) {
                    accum(adjt[n.a],
                          minv::add(matmul_bt(*gt, pb.val), matmul_bt(g, pb.tan)));
                    accum(adjt[n.b],
                          minv::add(matmul_at(pa.tan, g), matmul_at(pa.val, *gt)));
                }
                break;
            }

            case OpKind::add_row: {
                auto colsum = [](const Tensor& m) {
                    Tensor out({m.cols()});
                    auto md = m.data();
                    auto od = out.data();
                    for (std::size_t i = 0; i < m.rows(); ++i)
                        for (std::size_t j = 0; j < m.cols(); ++j) od[j] += md[i * m.cols() + j];
                    return out;
                };
                accum(adj[n.a], g);
                accum(adj[n.b], colsum(g));
                if (dual) {
                    accum(adjt[n.a], *gt);
                    accum(adjt[n.b], colsum(*gt));
                }
                break;
            }

            case OpKind::relu:
            case OpKind::clamp_min: {
                const Tensor& x = nodes_[n.a].val;
                const double lo = n.op == OpKind::relu ? 0.0 : n.c;
                Tensor ga = g;
                {
                    auto xd = x.data();
                    auto gd = ga.data();
                    for (std::size_t i = 0; i < gd.size(); ++i)
                        if (xd[i] <= lo) gd[i] = 0.0;
                }
                accum(adj[n.a], ga);
                if (dual) {
                    Tensor gta = *gt;
                    auto xd = x.data();
                    auto gd = gta.data();
                    for (std::size_t i = 0; i < gd.size(); ++i)
                        if (xd[i] <= lo) gd[i] = 0.0;
                    accum(adjt[n.a], gta);
                }
                break;
            }

            case OpKind::sigmoid: {
                const Tensor& s = n.val;
                Tensor ga = g;
                auto sd = s.data();
                {
                    auto gd = ga.data();
                    for (std::size_t i = 0; i < gd.size(); ++i)
                        gd[i] *= sd[i] * (1.0 - sd[i]);
                }
                accum(adj[n.a], ga);
                if (dual) {
                    // d/dr [s(1-s) * gbar] = (1-2s) sdot * gbar + s(1-s) * gbar_dot
                    Tensor gta(g.shape());
                    auto gd = g.data();
                    auto gtd = gt->data();
                    auto st = n.tan.data();
                    auto od = gta.data();
                    for (std::size_t i = 0; i < od.size(); ++i) {
                        const double dv = sd[i] * (1.0 - sd[i]);
                        od[i] = dv * gtd[i] + (1.0 - 2.0 * sd[i]) * st[i] * gd[i];
                    }
                    accum(adjt[n.a], gta);
                }
                break;
            }

            case OpKind::tanh_fn: {
                const Tensor& y = n.val;
                Tensor ga = g;
                auto yd = y.data();
                {
                    auto gd = ga.data();
                    for (std::size_t i = 0; i < gd.size(); ++i)
                        gd[i] *= 1.0 - yd[i] * yd[i];
                }
                accum(adj[n.a], ga);
                if (dual) {
                    Tensor gta = *gt;
                    auto gd = g.data();
                    auto gtd = gta.data();
                    auto yt = n.tan.data();
                    for (std::size_t i = 0; i < gtd.size(); ++i) {
                        const double dv = 1.0 - yd[i] * yd[i];
                        gtd[i] = dv * gtd[i] - 2.0 * yd[i] * yt[i] * gd[i];
                    }
                    accum(adjt[n.a], gta);
                }
                break;
            }

            case OpKind::log_fn: {
                const Tensor& x = nodes_[n.a].val;
                Tensor ga = g;
                auto xd = x.data();
                {
                    auto gd = ga.data();
                    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] /= xd[i];
                }
                accum(adj[n.a], ga);
                if (dual) {
                    Tensor gta = *gt;
                    auto gd = g.data();
                    auto gtd = gta.data();
                    auto xt = nodes_[n.a].tan.data();
                    for (std::size_t i = 0; i < gtd.size(); ++i)
                        gtd[i] = gtd[i] / xd[i] - gd[i] * xt[i] / (xd[i] * xd[i]);
                    accum(adjt[n.a], gta);
                }
                break;
            }

            case OpKind::sum_all: {
                const Tensor& x = nodes_[n.a].val;
                accum(adj[n.a], Tensor::full(x.shape(), g.item()));
                if (dual) accum(adjt[n.a], Tensor::full(x.shape(), gt->item()));
                break;
            }

            case OpKind::mean_all: {
                const Tensor& x = nodes_[n.a].val;
                const double inv = 1.0 / static_cast<double>(x.size());
                accum(adj[n.a], Tensor::full(x.shape(), g.item() * inv));
                if (dual) accum(adjt[n.a], Tensor::full(x.shape(), gt->item() * inv));
                break;
            }

            case OpKind::softmax_ce: {
                const Tensor& probs = n.aux;
                const Tensor& tgt = n.targets;
                const std::size_t r = probs.rows(), c = probs.cols();
                const double gs = g.item() / static_cast<double>(r);
                Tensor ga({r, c});
                auto pd = probs.data();
                auto td = tgt.data();
                auto gd = ga.data();
                for (std::size_t i = 0; i < r * c; ++i) gd[i] = gs * (pd[i] - td[i]);
                accum(adj[n.a], ga);
                if (dual) {
                    const double gts = gt->item() / static_cast<double>(r);
                    Tensor gta({r, c});
                    auto ptd = n.aux_tan.data();
                    auto gtd = gta.data();
                    for (std::size_t i = 0; i < r * c; ++i)
                        gtd[i] = gts * (pd[i] - td[i]) + gs * ptd[i];
                    accum(adjt[n.a], gta);
                }
                break;
            }

            case OpKind::lp_sum: {
                const Tensor& x = nodes_[n.a].val;
                const double gs = g.item();
                Tensor ga(x.shape());
                auto xd = x.data();
                auto gd = ga.data();
                for (std::size_t i = 0; i < gd.size(); ++i)
                    gd[i] = gs * abs_pow_grad(xd[i], n.ip);
                accum(adj[n.a], ga);
                if (dual) {
                    const double gts = gt->item();
                    Tensor gta(x.shape());
                    auto xt = nodes_[n.a].tan.data();
                    auto gtd = gta.data();
                    for (std::size_t i = 0; i < gtd.size(); ++i)
                        gtd[i] = gts * abs_pow_grad(xd[i], n.ip) +
                                 gs * abs_pow_grad2(xd[i], n.ip) * xt[i];
                    accum(adjt[n.a], gta);
                }
                break;
            }
        }
    }
}

} // namespace minv
