#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace crystalign {

struct ElementInfo {
  int z;
  std::string_view symbol;
  double pauling_electronegativity;  // 0 where undefined (noble gases)
  bool metal;
};

namespace detail {
inline constexpr std::array<ElementInfo, 118> kElements{{
    {1, "H", 2.20, false},
    {2, "He", 0.00, false},
    {3, "Li", 0.98, true},
    {4, "Be", 1.57, true},
    {5, "B", 2.04, false},
    {6, "C", 2.55, false},
    {7, "N", 3.04, false},
    {8, "O", 3.44, false},
    {9, "F", 3.98, false},
    {10, "Ne", 0.00, false},
    {11, "Na", 0.93, true},
    {12, "Mg", 1.31, true},
    {13, "Al", 1.61, true},
    {14, "Si", 1.90, false},
    {15, "P", 2.19, false},
    {16, "S", 2.58, false},
    {17, "Cl", 3.16, false},
    {18, "Ar", 0.00, false},
    {19, "K", 0.82, true},
    {20, "Ca", 1.00, true},
    {21, "Sc", 1.36, true},
    {22, "Ti", 1.54, true},
    {23, "V", 1.63, true},
    {24, "Cr", 1.66, true},
    {25, "Mn", 1.55, true},
    {26, "Fe", 1.83, true},
    {27, "Co", 1.88, true},
    {28, "Ni", 1.91, true},
    {29, "Cu", 1.90, true},
    {30, "Zn", 1.65, true},
    {31, "Ga", 1.81, true},
    {32, "Ge", 2.01, false},
    {33, "As", 2.18, false},
    {34, "Se", 2.55, false},
    {35, "Br", 2.96, false},
    {36, "Kr", 3.00, false},
    {37, "Rb", 0.82, true},
    {38, "Sr", 0.95, true},
    {39, "Y", 1.22, true},
    {40, "Zr", 1.33, true},
    {41, "Nb", 1.60, true},
    {42, "Mo", 2.16, true},
    {43, "Tc", 1.90, true},
    {44, "Ru", 2.20, true},
    {45, "Rh", 2.28, true},
    {46, "Pd", 2.20, true},
    {47, "Ag", 1.93, true},
    {48, "Cd", 1.69, true},
    {49, "In", 1.78, true},
    {50, "Sn", 1.96, true},
    {51, "Sb", 2.05, false},
    {52, "Te", 2.10, false},
    {53, "I", 2.66, false},
    {54, "Xe", 2.60, false},
    {55, "Cs", 0.79, true},
    {56, "Ba", 0.89, true},
    {57, "La", 1.10, true},
    {58, "Ce", 1.12, true},
    {59, "Pr", 1.13, true},
    {60, "Nd", 1.14, true},
    {61, "Pm", 1.13, true},
    {62, "Sm", 1.17, true},
    {63, "Eu", 1.20, true},
    {64, "Gd", 1.20, true},
    {65, "Tb", 1.10, true},
    {66, "Dy", 1.22, true},
    {67, "Ho", 1.23, true},
    {68, "Er", 1.24, true},
    {69, "Tm", 1.25, true},
    {70, "Yb", 1.10, true},
    {71, "Lu", 1.27, true},
    {72, "Hf", 1.30, true},
    {73, "Ta", 1.50, true},
    {74, "W", 2.36, true},
    {75, "Re", 1.90, true},
    {76, "Os", 2.20, true},
    {77, "Ir", 2.20, true},
    {78, "Pt", 2.28, true},
    {79, "Au", 2.54, true},
    {80, "Hg", 2.00, true},
    {81, "Tl", 1.62, true},
    {82, "Pb", 2.33, true},
    {83, "Bi", 2.02, true},
    {84, "Po", 2.00, false},
    {85, "At", 2.20, false},
    {86, "Rn", 2.20, false},
    {87, "Fr", 0.70, true},
    {88, "Ra", 0.90, true},
    {89, "Ac", 1.10, true},
    {90, "Th", 1.30, true},
    {91, "Pa", 1.50, true},
    {92, "U", 1.38, true},
    {93, "Np", 1.36, true},
    {94, "Pu", 1.28, true},
    {95, "Am", 1.30, true},
    {96, "Cm", 1.30, true},
    {97, "Bk", 1.30, true},
    {98, "Cf", 1.30, true},
    {99, "Es", 1.30, true},
    {100, "Fm", 1.30, true},
    {101, "Md", 1.30, true},
    {102, "No", 1.30, true},
    {103, "Lr", 1.30, true},
    {104, "Rf", 0.00, true},
    {105, "Db", 0.00, true},
    {106, "Sg", 0.00, true},
    {107, "Bh", 0.00, true},
    {108, "Hs", 0.00, true},
    {109, "Mt", 0.00, true},
    {110, "Ds", 0.00, true},
    {111, "Rg", 0.00, true},
    {112, "Cn", 0.00, true},
    {113, "Nh", 0.00, false},
    {114, "Fl", 0.00, false},
    {115, "Mc", 0.00, false},
    {116, "Lv", 0.00, false},
    {117, "Ts", 0.00, false},
    {118, "Og", 0.00, false},
}};
}  // namespace detail

inline const std::array<ElementInfo, 118>& periodic_table() { return detail::kElements; }

inline std::optional<ElementInfo> find_element(std::string_view symbol) {
  for (const auto& e : detail::kElements)
    if (e.symbol == symbol) return e;
  return std::nullopt;
}

inline bool is_element_symbol(std::string_view symbol) { return find_element(symbol).has_value(); }

}  // namespace crystalign
