#include "wolbdyn/fields.hpp"

namespace wolbdyn {

ode::Rhs single_field(const SingleStrainParams& params, double direction) {
    return [params, direction](std::span<const double> y, std::span<double> dydt) {
        const State2 d = rhs_single_unchecked({y[0], y[1]}, params);
        dydt[0] = direction * d.i;
        dydt[1] = direction * d.u;
    };
}

ode::Rhs multistrain_field(const MultiStrainParams& params, double direction) {
    return [params, direction](std::span<const double> y, std::span<double> dydt) {
        const State4 s{y[0], y[1], y[2], y[3]};
        if (s.total() == 0.0) {
            for (auto& v : dydt) v = 0.0;
            return;
        }
        const State4 d = rhs_multistrain_unchecked(s, params);
        dydt[0] = direction * d.i_AB;
        dydt[1] = direction * d.i_A;
        dydt[2] = direction * d.i_B;
        dydt[3] = direction * d.u;
    };
}

std::vector<State4> to_state4(const ode::Trajectory& traj) {
    std::vector<State4> out;
    out.reserve(traj.states.size());
    for (const auto& y : traj.states) out.push_back({y[0], y[1], y[2], y[3]});
    return out;
}

}  // namespace wolbdyn
