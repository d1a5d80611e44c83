#include "alma/grid.hpp"

namespace alma {

const std::string& ieee37_topology_text() {
    static const std::string text = R"TOPO(# Synthetic 37-node radial feeder with 17 aggregators.
# Line resistance is 0.004 p.u. per 1000 ft of the feeder's segment
# lengths, reactance half the resistance; capacity is 0.08 p.u. per
# downstream aggregator (at least one). Base power 2500 kW.
substation 799
voltage 0.95 1.05 1.0
base_power 2500
loss_slope 20
node 701 A1 0
node 712 A2 0
node 741 A3 0
node 720 A4 0
node 727 A5 0
node 730 A6 0
node 744 A7 0
node 728 A8 0
node 742 A9 0
node 713 A10 0
node 733 A11 0
node 740 A12 0
node 724 A13 0
node 731 A14 0
node 718 A15 0
node 736 A16 0
node 738 A17 0
line 799 701 0.0074 0.0037 1.36
line 701 702 0.00384 0.00192 1.28
line 702 705 0.0016 0.0008 0.16
line 702 713 0.00144 0.00072 0.32
line 702 703 0.00528 0.00264 0.8
line 703 727 0.00096 0.00048 0.24
line 703 730 0.0024 0.0012 0.56
line 704 714 0.00032 0.00016 0.08
line 704 720 0.0032 0.0016 0.16
line 705 742 0.00128 0.00064 0.08
line 705 712 0.00096 0.00048 0.08
line 706 725 0.00112 0.00056 0.08
line 707 724 0.00304 0.00152 0.08
line 707 722 0.00048 0.00024 0.08
line 708 733 0.00128 0.00064 0.4
line 708 732 0.00128 0.00064 0.08
line 709 731 0.0024 0.0012 0.08
line 709 708 0.00128 0.00064 0.4
line 710 735 0.0008 0.0004 0.08
line 710 736 0.00512 0.00256 0.08
line 711 741 0.0016 0.0008 0.08
line 711 740 0.0008 0.0004 0.08
line 713 704 0.00208 0.00104 0.24
line 714 718 0.00208 0.00104 0.08
line 720 707 0.00368 0.00184 0.08
line 720 706 0.0024 0.0012 0.08
line 727 744 0.00112 0.00056 0.16
line 730 709 0.0008 0.0004 0.48
line 733 734 0.00224 0.00112 0.32
line 734 737 0.00256 0.00128 0.24
line 734 710 0.00208 0.00104 0.08
line 737 738 0.0016 0.0008 0.24
line 738 711 0.0016 0.0008 0.16
line 744 728 0.0008 0.0004 0.08
line 744 729 0.00112 0.00056 0.08
line 709 775 0.0002 0.0001 0.08
)TOPO";
    return text;
}

}  // namespace alma
