// SPDX-License-Identifier: Apache-2.0
//
// Perturb an isometry-pair homomorphism by bounded noise, recover it with the
// direct method and compare the distance ||f(x) - T(x)|| with the stability bound.

#include <iostream>

#include "ternary_stab.hpp"

int main() {
    using namespace tstab;
    const TrifParams p = make_params(3, 2);
    const Shape shape{2, 2};

    const ExactHom S = random_exact_hom(shape, enlarged(shape), 2024);
    const MapUnderTest f = make_perturbed_hom(S, NoiseSpec::constant_ball(0.01), p, 7);
    std::cout << "scenario " << f.meta.id << ", control " << f.control.to_json().dump() << "\n";

    IterationOptions io;
    io.control = f.control;
    const ExtractedMap T = extract_map(f, shape, p, io);
    std::cout << "extracted with n_used = " << T.provenance.n_used << ", max |T - S| entry = "
              << (T.representation - S.representation()).cwiseAbs().maxCoeff() << "\n";

    ElementSampler sampler(shape, 2.0, 99);
    for (int k = 0; k < 5; ++k) {
        const RingElement x = sampler.next();
        std::cout << "||x|| = " << norm(x) << "  ||f(x) - T(x)|| = " << norm(f(x) - T(x))
                  << "  bound = " << stability_bound(f.control, p, x) << "\n";
    }
}
