#pragma once

// Standard parameter list: N = 20 quarters, r_F = 2 %, five 500 bp market
// quotes (1-5 years) and a five-year illiquid CDS at 100 bp.

#include "cdsbounds/market_model.hpp"

namespace fixtures {

inline cdsbounds::TenorGrid grid() { return cdsbounds::TenorGrid(20, 0.02); }

inline cdsbounds::QuoteSet quotes() {
    return {{4, 0.0525, 0.05}, {8, 0.1247, 0.05}, {12, 0.1808, 0.05}, {16, 0.2156, 0.05},
            {20, 0.2405, 0.05}};
}

inline cdsbounds::CdsSpec illiquid(double spread_bp = 100.0) { return {20, spread_bp * 1e-4, 1.0}; }

// Published hedges: notionals for the 1-5 year quotes, then the deposit.
inline constexpr double kTable3Lub[6] = {-0.0319, -0.0342, -0.0368, -0.0395, 1.0000, 0.1720};
inline constexpr double kTable3Glb[6] = {-0.0403, -0.0431, -0.0462, -0.0495, 1.1791, 0.0000};

} // namespace fixtures
