#ifndef GPDISCRIM_BESSEL_HPP
#define GPDISCRIM_BESSEL_HPP

namespace gpdiscrim {

// log of the modified Bessel function of the second kind K_nu(x).
//
// Temme's series for x < 2 and a Steed-type continued fraction for x >= 2,
// both at reduced order mu in [-1/2, 1/2], followed by upward recurrence.
// The recurrence and the large-x branch are carried in log scale, so the
// result stays finite where K_nu itself would overflow or underflow a double
// (e.g. nu = 50 at x -> 0, or x of several hundred).
//
// Supported domain: nu in (0, 50], x in (0, 1.5e4). Outside it an
// std::invalid_argument is thrown.
double log_bessel_k(double nu, double x);

// K_nu(x) itself; may overflow/underflow at the edges of the domain.
double bessel_k(double nu, double x);

}  // namespace gpdiscrim

#endif
