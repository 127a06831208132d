#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace erestab {

// Explicit Dormand-Prince 8(5,3) with Hairer's combined error estimator.
template <typename Scalar, int N>
class Dop853 {
 public:
  using State = Eigen::Matrix<Scalar, N, 1>;

  struct Options {
    Scalar rtol = Scalar(1e-12);
    Scalar atol = Scalar(1e-12);
    Scalar h_max = 0;  // 0 means |t1 - t0|
    long max_steps = 1000000;
  };

  struct Stats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
    Scalar last_h = 0;
  };

  // Advances y from t0 to t1. `h` carries the suggested step between calls (0 = pick one).
  template <class F>
  static State integrate(F&& f, Scalar t0, Scalar t1, State y, const Options& opt, Stats& st, Scalar& h) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;
    const Scalar span = t1 - t0;
    if (span == 0) return y;
    const Scalar dir = span > 0 ? Scalar(1) : Scalar(-1);
    const Scalar hmax = opt.h_max > 0 ? opt.h_max : abs(span);
    const Scalar uround = std::numeric_limits<Scalar>::epsilon();
    const Scalar n = Scalar(y.size());

    State k1 = f(t0, y), k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, yt, y1;
    ++st.evaluations;
    if (h == 0) h = initial_step(f, t0, y, k1, dir, hmax, opt, st);
    h = dir * min(abs(h), hmax);

    Scalar t = t0;
    bool last_rejected = false;
    for (long step = 0;; ++step) {
      if (step >= opt.max_steps) throw ConvergenceError("integrator exceeded the step budget");
      if (Scalar(0.1) * abs(h) <= abs(t) * uround)
        throw ConvergenceError("integrator step size underflow at t=" + std::to_string(double(t)));
      bool last = false;
      if ((t + Scalar(1.01) * h - t1) * dir >= 0) {
        h = t1 - t;
        last = true;
      }

      yt = y + h * C::a21 * k1;
      k2 = f(t + C::c2 * h, yt);
      yt = y + h * (C::a31 * k1 + C::a32 * k2);
      k3 = f(t + C::c3 * h, yt);
      yt = y + h * (C::a41 * k1 + C::a43 * k3);
      k4 = f(t + C::c4 * h, yt);
      yt = y + h * (C::a51 * k1 + C::a53 * k3 + C::a54 * k4);
      k5 = f(t + C::c5 * h, yt);
      yt = y + h * (C::a61 * k1 + C::a64 * k4 + C::a65 * k5);
      k6 = f(t + C::c6 * h, yt);
      yt = y + h * (C::a71 * k1 + C::a74 * k4 + C::a75 * k5 + C::a76 * k6);
      k7 = f(t + C::c7 * h, yt);
      yt = y + h * (C::a81 * k1 + C::a84 * k4 + C::a85 * k5 + C::a86 * k6 + C::a87 * k7);
      k8 = f(t + C::c8 * h, yt);
      yt = y + h * (C::a91 * k1 + C::a94 * k4 + C::a95 * k5 + C::a96 * k6 + C::a97 * k7 + C::a98 * k8);
      k9 = f(t + C::c9 * h, yt);
      yt = y + h * (C::a101 * k1 + C::a104 * k4 + C::a105 * k5 + C::a106 * k6 + C::a107 * k7 +
                    C::a108 * k8 + C::a109 * k9);
      k10 = f(t + C::c10 * h, yt);
      yt = y + h * (C::a111 * k1 + C::a114 * k4 + C::a115 * k5 + C::a116 * k6 + C::a117 * k7 +
                    C::a118 * k8 + C::a119 * k9 + C::a1110 * k10);
      k11 = f(t + C::c11 * h, yt);
      yt = y + h * (C::a121 * k1 + C::a124 * k4 + C::a125 * k5 + C::a126 * k6 + C::a127 * k7 +
                    C::a128 * k8 + C::a129 * k9 + C::a1210 * k10 + C::a1211 * k11);
      Scalar tph = t + h;
      k12 = f(tph, yt);
      st.evaluations += 11;

      State incr = C::b1 * k1 + C::b6 * k6 + C::b7 * k7 + C::b8 * k8 + C::b9 * k9 + C::b10 * k10 +
                   C::b11 * k11 + C::b12 * k12;
      y1 = y + h * incr;

      State e3 = incr - C::bhh1 * k1 - C::bhh2 * k9 - C::bhh3 * k12;
      State e5 = C::er1 * k1 + C::er6 * k6 + C::er7 * k7 + C::er8 * k8 + C::er9 * k9 + C::er10 * k10 +
                 C::er11 * k11 + C::er12 * k12;
      Scalar err3 = 0, err5 = 0;
      for (int i = 0; i < y.size(); ++i) {
        Scalar sk = opt.atol + opt.rtol * max(abs(y[i]), abs(y1[i]));
        err3 += (e3[i] / sk) * (e3[i] / sk);
        err5 += (e5[i] / sk) * (e5[i] / sk);
      }
      Scalar deno = err5 + Scalar(0.01) * err3;
      if (deno <= 0) deno = 1;
      Scalar err = abs(h) * err5 * sqrt(1 / (n * deno));

      Scalar fac11 = pow(err, Scalar(0.125));
      Scalar fac = max(Scalar(1) / 6, min(Scalar(3), fac11 / Scalar(0.9)));
      Scalar hnew = h / fac;
      if (err <= 1) {
        ++st.accepted;
        k1 = f(tph, y1);
        ++st.evaluations;
        y = y1;
        t = tph;
        if (last) {
          st.last_h = h;
          h = hnew;
          return y;
        }
        if (abs(hnew) > hmax) hnew = dir * hmax;
        if (last_rejected) hnew = dir * min(abs(hnew), abs(h));
        last_rejected = false;
        h = hnew;
      } else {
        h = h / min(Scalar(3), fac11 / Scalar(0.9));
        last_rejected = true;
        ++st.rejected;
      }
    }
  }

 private:
  template <class F>
  static Scalar initial_step(F& f, Scalar t, const State& y, const State& f0, Scalar dir, Scalar hmax,
                             const Options& opt, Stats& st) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;
    Scalar dnf = 0, dny = 0;
    for (int i = 0; i < y.size(); ++i) {
      Scalar sk = opt.atol + opt.rtol * abs(y[i]);
      dnf += (f0[i] / sk) * (f0[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    Scalar h = (dnf <= Scalar(1e-10) || dny <= Scalar(1e-10)) ? Scalar(1e-6) : sqrt(dny / dnf) * Scalar(0.01);
    h = dir * min(h, hmax);
    State y1 = y + h * f0;
    State f1 = f(t + h, y1);
    ++st.evaluations;
    Scalar der2 = 0;
    for (int i = 0; i < y.size(); ++i) {
      Scalar sk = opt.atol + opt.rtol * abs(y[i]);
      der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = sqrt(der2) / abs(h);
    Scalar der12 = max(abs(der2), sqrt(dnf));
    Scalar h1 = der12 <= Scalar(1e-15) ? max(Scalar(1e-6), abs(h) * Scalar(1e-3))
                                       : pow(Scalar(0.01) / der12, Scalar(0.125));
    return dir * min(min(100 * abs(h), h1), hmax);
  }

  struct C {
    static constexpr Scalar c2 = 0.526001519587677318785587544488e-01L;
    static constexpr Scalar c3 = 0.789002279381515978178381316732e-01L;
    static constexpr Scalar c4 = 0.118350341907227396726757197510e+00L;
    static constexpr Scalar c5 = 0.281649658092772603273242802490e+00L;
    static constexpr Scalar c6 = 0.333333333333333333333333333333e+00L;
    static constexpr Scalar c7 = 0.25e+00L;
    static constexpr Scalar c8 = 0.307692307692307692307692307692e+00L;
    static constexpr Scalar c9 = 0.651282051282051282051282051282e+00L;
    static constexpr Scalar c10 = 0.6e+00L;
    static constexpr Scalar c11 = 0.857142857142857142857142857142e+00L;

    static constexpr Scalar a21 = 5.26001519587677318785587544488e-2L;
    static constexpr Scalar a31 = 1.97250569845378994544595329183e-2L;
    static constexpr Scalar a32 = 5.91751709536136983633785987549e-2L;
    static constexpr Scalar a41 = 2.95875854768068491816892993775e-2L;
    static constexpr Scalar a43 = 8.87627564304205475450678981324e-2L;
    static constexpr Scalar a51 = 2.41365134159266685502369798665e-1L;
    static constexpr Scalar a53 = -8.84549479328286085344864962717e-1L;
    static constexpr Scalar a54 = 9.24834003261792003115737966543e-1L;
    static constexpr Scalar a61 = 3.7037037037037037037037037037e-2L;
    static constexpr Scalar a64 = 1.70828608729473871279604482173e-1L;
    static constexpr Scalar a65 = 1.25467687566822425016691814123e-1L;
    static constexpr Scalar a71 = 3.7109375e-2L;
    static constexpr Scalar a74 = 1.70252211019544039314978060272e-1L;
    static constexpr Scalar a75 = 6.02165389804559606850219397283e-2L;
    static constexpr Scalar a76 = -1.7578125e-2L;
    static constexpr Scalar a81 = 3.70920001185047927108779319836e-2L;
    static constexpr Scalar a84 = 1.70383925712239993810214054705e-1L;
    static constexpr Scalar a85 = 1.07262030446373284651809199168e-1L;
    static constexpr Scalar a86 = -1.53194377486244017527936158236e-2L;
    static constexpr Scalar a87 = 8.27378916381402288758473766002e-3L;
    static constexpr Scalar a91 = 6.24110958716075717114429577812e-1L;
    static constexpr Scalar a94 = -3.36089262944694129406857109825e0L;
    static constexpr Scalar a95 = -8.68219346841726006818189891453e-1L;
    static constexpr Scalar a96 = 2.75920996994467083049415600797e1L;
    static constexpr Scalar a97 = 2.01540675504778934086186788979e1L;
    static constexpr Scalar a98 = -4.34898841810699588477366255144e1L;
    static constexpr Scalar a101 = 4.77662536438264365890433908527e-1L;
    static constexpr Scalar a104 = -2.48811461997166764192642586468e0L;
    static constexpr Scalar a105 = -5.90290826836842996371446475743e-1L;
    static constexpr Scalar a106 = 2.12300514481811942347288949897e1L;
    static constexpr Scalar a107 = 1.52792336328824235832596922938e1L;
    static constexpr Scalar a108 = -3.32882109689848629194453265587e1L;
    static constexpr Scalar a109 = -2.03312017085086261358222928593e-2L;
    static constexpr Scalar a111 = -9.3714243008598732571704021658e-1L;
    static constexpr Scalar a114 = 5.18637242884406370830023853209e0L;
    static constexpr Scalar a115 = 1.09143734899672957818500254654e0L;
    static constexpr Scalar a116 = -8.14978701074692612513997267357e0L;
    static constexpr Scalar a117 = -1.85200656599969598641566180701e1L;
    static constexpr Scalar a118 = 2.27394870993505042818970056734e1L;
    static constexpr Scalar a119 = 2.49360555267965238987089396762e0L;
    static constexpr Scalar a1110 = -3.0467644718982195003823669022e0L;
    static constexpr Scalar a121 = 2.27331014751653820792359768449e0L;
    static constexpr Scalar a124 = -1.05344954667372501984066689879e1L;
    static constexpr Scalar a125 = -2.00087205822486249909675718444e0L;
    static constexpr Scalar a126 = -1.79589318631187989172765950534e1L;
    static constexpr Scalar a127 = 2.79488845294199600508499808837e1L;
    static constexpr Scalar a128 = -2.85899827713502369474065508674e0L;
    static constexpr Scalar a129 = -8.87285693353062954433549289258e0L;
    static constexpr Scalar a1210 = 1.23605671757943030647266201528e1L;
    static constexpr Scalar a1211 = 6.43392746015763530355970484046e-1L;

    static constexpr Scalar b1 = 5.42937341165687622380535766363e-2L;
    static constexpr Scalar b6 = 4.45031289275240888144113950566e0L;
    static constexpr Scalar b7 = 1.89151789931450038304281599044e0L;
    static constexpr Scalar b8 = -5.8012039600105847814672114227e0L;
    static constexpr Scalar b9 = 3.1116436695781989440891606237e-1L;
    static constexpr Scalar b10 = -1.52160949662516078556178806805e-1L;
    static constexpr Scalar b11 = 2.01365400804030348374776537501e-1L;
    static constexpr Scalar b12 = 4.47106157277725905176885569043e-2L;

    static constexpr Scalar bhh1 = 0.244094488188976377952755905512e+00L;
    static constexpr Scalar bhh2 = 0.733846688281611857341361741547e+00L;
    static constexpr Scalar bhh3 = 0.220588235294117647058823529412e-01L;

    static constexpr Scalar er1 = 0.1312004499419488073250102996e-01L;
    static constexpr Scalar er6 = -0.1225156446376204440720569753e+01L;
    static constexpr Scalar er7 = -0.4957589496572501915214079952e+00L;
    static constexpr Scalar er8 = 0.1664377182454986536961530415e+01L;
    static constexpr Scalar er9 = -0.3503288487499736816886487290e+00L;
    static constexpr Scalar er10 = 0.3341791187130174790297318841e+00L;
    static constexpr Scalar er11 = 0.8192320648511571246570742613e-01L;
    static constexpr Scalar er12 = -0.2235530786388629525884427845e-01L;
  };
};

}  // namespace erestab
