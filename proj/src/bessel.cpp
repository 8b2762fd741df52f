#include "nmd/bessel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "nmd/error.hpp"

namespace nmd {

namespace {

// Chebyshev coefficients of e^x sqrt(x) K_1(x) - 1.25 on [2, 8] and
// [8, inf), from SLATEC FNLIB DBSK1E (public domain).
constexpr std::array<double, 38> kAk1 = {
    0.27443134069738829695257666227266,     0.07571989953199367817089237814929,
    -0.0014410515564754061229853116175625,  6.6501169551257479394251385477036e-5,
    -4.3699847095201407660580845089167e-6,  3.5402774997630526799417139008534e-7,
    -3.3111637792932920208982688245704e-8,  3.4459775819010534532311499770992e-9,
    -3.8989323474754271048981937492758e-10, 4.7208197504658356400947449339005e-11,
    -6.047835662875356234537359156289e-12,  8.1284948748658747888193837985663e-13,
    -1.1386945747147891428923915951042e-13, 1.654035840846228232597294820509e-14,
    -2.4809025677068848221516010440533e-15, 3.8292378907024096948429227299157e-16,
    -6.0647341040012418187768210377386e-17, 9.8324256232648616038194004650666e-18,
    -1.6284168738284380035666620115626e-18, 2.7501536496752623718284120337066e-19,
    -4.7289666463953250924281069568e-20,    8.2681500028109932722392050346666e-21,
    -1.4681405136624956337193964885333e-21, 2.6447639269208245978085894826666e-22,
    -4.82901575648563878979698688e-23,      8.9293020743610130180656332799999e-24,
    -1.6708397168972517176997751466666e-24, 3.1616456034040694931368618666666e-25,
    -6.0462055312274989106506410666666e-26, 1.1678798942042732700718421333333e-26,
    -2.277374158265399623286784e-27,        4.4811097300773675795305813333333e-28,
    -8.8932884769020194062336e-29,          1.7794680018850275131392e-29,
    -3.5884555967329095821994666666666e-30, 7.2906290492694257991679999999999e-31,
    -1.4918449845546227073024e-31,          3.0736573872934276300799999999999e-32};

constexpr std::array<double, 33> kAk12 = {
    0.06379308343739001036600488534102,     0.02832887813049720935835030284708,
    -2.475370673905250345414545566732e-4,   5.771972451607248820470976625763e-6,
    -2.068939219536548302745533196552e-7,   9.739983441381804180309213097887e-9,
    -5.585336140380624984688895511129e-10,  3.732996634046185240221212854731e-11,
    -2.825051961023225445135065754928e-12,  2.372019002484144173643496955486e-13,
    -2.176677387991753979268301667938e-14,  2.157914161616032453939562689706e-15,
    -2.290196930718269275991551338154e-16,  2.582885729823274961919939565226e-17,
    -3.07675264126846318762109817344e-18,   3.851487721280491597094896844799e-19,
    -5.0447948976415289771172825088e-20,    6.888673850418544237018292223999e-21,
    -9.77504154195011830300213248e-22,      1.437416218523836461001659733333e-22,
    -2.185059497344347373499733333333e-23,  3.4262456218092206316453888e-24,
    -5.531064394246408232501248e-25,        9.176601505685995403782826666666e-26,
    -1.562287203618024911448746666666e-26,  2.725419375484333132349439999999e-27,
    -4.865674910074827992378026666666e-28,  8.879388552723502587357866666666e-29,
    -1.654585918039257548936533333333e-29,  3.145111321357848674303999999999e-30,
    -6.092998312193127612416e-31,           1.202021939369815834623999999999e-31,
    -2.412930801459408841386666666666e-32};

// Clenshaw recurrence, SLATEC DCSEVL convention (first coefficient halved).
template <std::size_t N>
double chebyshev_eval(double x, const std::array<double, N>& cs) {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    const double twox = 2.0 * x;
    for (std::size_t i = N; i-- > 0;) {
        b2 = b1;
        b1 = b0;
        b0 = twox * b1 - b2 + cs[i];
    }
    return 0.5 * (b0 - b2);
}

// Ascending series around 0 with the logarithmic term; used on (0, 2].
double k1_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;                           // q^k / (k! (k+1)!)
    double psi_k1 = -std::numbers::egamma;       // psi(k+1)
    double psi_k2 = 1.0 - std::numbers::egamma;  // psi(k+2)
    double i_sum = 0.0;
    double k_sum = 0.0;
    for (int k = 0; k < 60; ++k) {
        i_sum += term;
        k_sum += (psi_k1 + psi_k2) * term;
        const double next = term * q / ((k + 1.0) * (k + 2.0));
        if (next < 1e-18 * i_sum) break;
        term = next;
        psi_k1 += 1.0 / (k + 1.0);
        psi_k2 += 1.0 / (k + 2.0);
    }
    const double i1 = 0.5 * x * i_sum;
    return 1.0 / x + std::log(0.5 * x) * i1 - 0.25 * x * k_sum;
}

double k1_scaled_asymptotic(double x) {
    if (x <= 8.0) return (chebyshev_eval((16.0 / x - 5.0) / 3.0, kAk1) + 1.25) / std::sqrt(x);
    return (chebyshev_eval(16.0 / x - 1.0, kAk12) + 1.25) / std::sqrt(x);
}

void check_argument(double x) {
    if (!(x > 0.0) || std::isinf(x))
        throw DomainError("bessel_k1: argument must be positive and finite, got " +
                          std::to_string(x));
}

}  // namespace

double bessel_k1(double x) {
    check_argument(x);
    if (x <= 2.0) return k1_series(x);
    return std::exp(-x) * k1_scaled_asymptotic(x);
}

double bessel_k1_scaled(double x) {
    check_argument(x);
    if (x <= 2.0) return std::exp(x) * k1_series(x);
    return k1_scaled_asymptotic(x);
}

double log_bessel_k1(double x) {
    check_argument(x);
    if (x <= 2.0) return std::log(k1_series(x));
    return std::log(k1_scaled_asymptotic(x)) - x;
}

}  // namespace nmd
