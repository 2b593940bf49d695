#pragma once

// Published benchmark data for the two test scenarios: linearized system
// matrices around the standard operating points and the two benchmark
// feedback gains selectable on the command line as "paper-KA" / "paper-KB".
// These serve as golden comparison data for the linearization and as gain
// inputs for simulation; they are not used in any computation path.

#include <Eigen/Dense>

#include "state_space.hpp"

namespace aqm2d::reference {

inline StateSpace2D scenario_a_matrices() {
    StateSpace2D ss;
    ss.n_h = ss.n_v = 2;
    ss.tau1 = 0.2;
    ss.tau2 = 0.201;
    ss.A = Eigen::MatrixXd::Zero(4, 4);
    ss.A << -0.0024941, -1.6563e-06, 0, 0,
            1596.4,      1.0602,     0, 0,
            1.9831,      0,          0, 0,
            0,           0,          1588.5, 1.0496;
    ss.A_tau = Eigen::MatrixXd::Zero(4, 4);
    ss.A_tau << 1.993, 0.0013252, 0, 0,
                0,     0,         0, 0,
                0,     0,         0, 0.0013104,
                0,     0,         0, 0;
    ss.B = Eigen::MatrixXd::Zero(4, 2);
    ss.B << 0,       0,
            -5312.8, 0,
            0,       -6.6465,
            0,       -5286.4;
    ss.B_tau = Eigen::MatrixXd::Zero(4, 2);
    ss.B_tau << 0, -6.6465,
                0, 0,
                0, 0,
                0, 0;
    return ss;
}

inline StateSpace2D scenario_b_matrices() {
    StateSpace2D ss;
    ss.n_h = ss.n_v = 2;
    ss.tau1 = 0.2;
    ss.tau2 = 0.201;
    ss.A = Eigen::MatrixXd::Zero(4, 4);
    ss.A << -175.8330, 0,       0,        0,
            933.8000,  2.4805,  0,        0,
            929.1285,  -2.4564, 0,        2.4554,
            0,         0,       929.1542, 2.4559;
    ss.A_tau = Eigen::MatrixXd::Zero(4, 4);
    ss.A_tau << 175.7512, 0.4669, 0, 0,
                0,        0,      0, 0,
                0,        0,      0, 0.0122,
                0,        0,      0, 0;
    ss.B = Eigen::MatrixXd::Zero(4, 2);
    ss.B << 0,       0,
            -5312.8, 0,
            0,       -5287.4,
            0,       -5286.4;
    ss.B_tau = Eigen::MatrixXd::Zero(4, 2);
    ss.B_tau << 0, -1001.0,
                0, 0,
                0, 0,
                0, 0;
    return ss;
}

inline Eigen::MatrixXd gain_ka() {
    Eigen::MatrixXd k(2, 4);
    k << 1.409040145867033, 0.001050302085212, -0.442659495007931, -0.000665182278239,
         0.261050119747904, 0.000106642597102, 0.377269799513580, 0.000536355427763;
    return k;
}

inline Eigen::MatrixXd gain_kb() {
    Eigen::MatrixXd k(2, 4);
    k << 0.194800805211746, 0.067127479835209, -0.000657956320659, -0.000033555865312,
         0.167303800511358, -0.000437270587770, 0.017422461138873, 0.000880352801977;
    return k;
}

}  // namespace aqm2d::reference
