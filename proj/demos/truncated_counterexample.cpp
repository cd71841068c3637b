// SPDX-License-Identifier: Apache-2.0
//
// The truncated homomorphism: equal to S inside the unit ball and zero outside.
// A constant control dominates its defect, and the direct method sends it to
// the zero map, not to S.

#include <iostream>

#include "ternary_stab.hpp"

int main() {
    using namespace tstab;
    const TrifParams p = make_params(3, 2);
    const Shape shape{2, 2};
    const MapUnderTest f = make_truncated_hom(random_exact_hom(shape, shape, 5), p, 5);

    const double delta = truncated_delta(p);
    const BoundCertificate cert = phi_tilde(f.control, p, collapse_args(p, RingElement::identity(2)));
    std::cout << "delta = " << delta << ", phi~ = " << cert.upper() << " (closed form "
              << *cert.closed_form_value << ")\n";
    std::cout << "stability bound = " << stability_bound(f.control, p, RingElement::identity(2)) << "\n";

    const ExtractedMap T = extract_map(f, shape, p);
    std::cout << "largest entry of the extracted map: " << T.representation.cwiseAbs().maxCoeff() << "\n";

    const auto dom = domination_check(f, p, 1000, 3);
    std::cout << "max sampled defect " << dom.max_defect << " against delta " << delta << "\n";
}
