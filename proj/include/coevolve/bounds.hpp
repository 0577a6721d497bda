#pragma once

namespace coevolve {

/// sqrt(2) max(1, L_W) d0 2 e^{2 L_K t}: stability of the mean-field flow
/// for Lipschitz graphons, d0 the initial W1 distance.
double dobrushin_bound(double l_k, double l_w, double d0, double t);

/// 2 dI0 e^{2 L_K t} + (1/2) ||W - W'||_{L^1} (e^{2 L_K t} - 1): stability in
/// the fibered distance for two graphons.
double dobrushin_bound_nonlip(double l_k, double d_i0, double w_l1_diff, double t);

}  // namespace coevolve
