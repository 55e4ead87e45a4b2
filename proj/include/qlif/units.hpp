#pragma once

#include <string>

namespace qlif {

/// Physical constants for one consistent unit system. The time coordinate
/// of every FourVector is c*t, so all four components carry length units.
struct UnitSystem {
    double c = 1.0;
    double G = 1.0;
    double hbar = 1.0;
    std::string name = "geometric";

    /// c = G = 1; hbar is left free because it sets the quantum scale.
    static UnitSystem geometric(double hbar = 1.0);
    static UnitSystem si();

    /// Throws InvalidArgument unless all constants are finite and > 0.
    void validate() const;

    // Conversions into geometric units (c = G = 1) with the length unit kept.
    double mass_to_geometric(double m) const { return G * m / (c * c); }
    double energy_to_geometric(double e) const { return G * e / (c * c * c * c); }
    double time_to_geometric(double t) const { return c * t; }
    double hbar_geometric() const { return G * hbar / (c * c * c); }

    bool operator==(const UnitSystem&) const = default;
};

}  // namespace qlif
