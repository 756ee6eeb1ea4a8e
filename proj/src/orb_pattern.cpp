#include "mosaic/features.hpp"

namespace mosaic {

// 256 point pairs (x1, y1, x2, y2) for the rotated binary tests. Drawn once
// from a splitmix64 stream seeded with 0x9E3779B9: coordinates are isotropic
// Gaussian with sigma 31/5 (Box-Muller), rounded, redrawn until inside
// [-15, 15]; a pair with identical endpoints is redrawn. Never edit by hand.
const std::array<std::array<std::int8_t, 4>, 256> kOrbPattern = {{
    {6, 2, -10, 4}, {9, 11, -2, 3}, {-1, -8, 2, 8}, {1, -6, -4, -13},
    {10, -7, 0, 7}, {7, -2, -6, -10}, {4, 9, 8, 0}, {0, -3, 0, -7},
    {0, 5, -4, -1}, {5, 0, 7, -3}, {2, -14, -3, 2}, {8, 5, 1, 7},
    {5, 9, -5, 5}, {9, -8, -10, -6}, {15, 11, -5, -11}, {0, 0, -3, 2},
    {-1, -10, 6, -12}, {3, 3, 0, -12}, {1, 0, 2, 5}, {-5, -6, -8, 2},
    {6, -2, 5, -3}, {12, 4, -5, 5}, {0, -7, 3, 7}, {4, -1, -8, 5},
    {-3, -3, 3, 8}, {5, 5, 10, 6}, {1, -1, -2, -12}, {-2, 12, 5, -3},
    {-7, 0, -3, 9}, {0, 1, 4, 6}, {1, 1, 2, -3}, {-4, -4, 6, 1},
    {9, 0, -6, 3}, {1, 10, -12, -8}, {-3, 1, 13, 6}, {-9, -10, 8, 2},
    {-7, 9, 3, -8}, {-4, 3, 1, 1}, {-8, -1, 1, 7}, {2, 4, -2, 3},
    {-14, 4, -3, -1}, {-3, 6, 0, 3}, {6, 4, -10, 11}, {-3, 0, 8, 10},
    {1, 9, -6, 4}, {-2, 0, 1, 8}, {-12, 12, 13, 4}, {9, 4, 5, 6},
    {9, -5, -2, 4}, {5, -1, 7, -2}, {-5, -6, 10, 13}, {5, -7, -1, 2},
    {3, 12, -1, 5}, {13, 1, 1, 2}, {13, 12, -1, -14}, {9, 0, -10, -4},
    {-5, 2, 5, 7}, {13, -8, 4, 1}, {-5, -9, 1, -3}, {-1, 8, 1, 2},
    {-11, 0, 0, 1}, {-10, 9, 8, -1}, {4, -2, 10, 3}, {-1, -2, -4, -5},
    {-2, 8, 9, -2}, {-7, -8, 4, -10}, {-11, -1, 3, -6}, {1, -1, -4, -5},
    {5, -2, -2, 8}, {3, 4, 6, 10}, {-10, 3, -6, 2}, {-7, 12, 7, 3},
    {1, 2, -3, -8}, {2, -7, -4, -5}, {6, 5, -9, 6}, {5, -2, -1, -7},
    {-4, -1, -11, -14}, {-9, 2, -7, 8}, {4, 7, 3, 1}, {-4, 3, -9, -4},
    {5, 6, -1, 5}, {3, 4, 0, 8}, {-7, 3, 1, -9}, {9, -10, -7, 6},
    {-2, -3, -6, 2}, {11, 1, 11, 4}, {-5, -1, 7, 1}, {-2, -8, 3, 3},
    {9, -11, 12, 5}, {-5, 2, 15, 2}, {-6, -2, 6, -5}, {5, 7, 6, 3},
    {3, -11, -2, 6}, {-6, -5, -3, -3}, {-4, -7, -8, 12}, {3, -6, -1, 6},
    {-3, 1, 5, -1}, {-15, 5, -11, -2}, {-4, 0, -5, -4}, {-3, 5, 4, 4},
    {1, -1, -2, 10}, {4, 12, -9, 9}, {3, -1, -5, 6}, {1, 10, 5, -2},
    {7, 7, 0, 1}, {13, -6, 8, -12}, {1, -7, -1, -9}, {12, -3, 5, -5},
    {2, -3, 5, 3}, {-7, 8, 7, 7}, {-3, -3, -11, 7}, {3, -2, 6, 1},
    {0, -5, -8, 2}, {9, 0, -3, -5}, {-4, -7, 5, 2}, {1, 4, -9, -2},
    {-2, -12, 4, -2}, {-5, -5, 2, -2}, {5, 0, 4, -1}, {-3, -12, 0, 3},
    {-5, -9, -6, 5}, {0, -1, -6, -2}, {-2, 3, 10, 2}, {8, -9, -2, -6},
    {10, 11, 5, 0}, {3, -11, -2, -2}, {-15, -6, 7, 13}, {9, -5, -1, 9},
    {-3, 9, -4, 2}, {-5, -9, -6, 11}, {-1, 2, -11, -1}, {-3, 3, 3, -7},
    {-2, 3, 0, -3}, {3, -1, -2, 2}, {-5, 3, 2, 11}, {4, -6, 2, 5},
    {-9, 13, 15, -5}, {-3, -4, 12, 1}, {4, -5, 2, 3}, {-4, 4, -3, 5},
    {12, 8, -15, 1}, {3, -7, -13, 9}, {5, 5, -2, 4}, {-4, 5, 1, -1},
    {4, 4, -7, 2}, {6, -5, -8, -5}, {1, 6, 5, 9}, {0, -11, 6, 0},
    {12, -5, -2, 0}, {1, 1, -10, -9}, {3, -6, 1, -2}, {-5, -1, 0, 3},
    {-1, -4, -9, 11}, {-6, -4, -2, -3}, {0, 7, -1, -1}, {9, 6, 1, -4},
    {-4, 8, -10, 12}, {-5, 7, 4, -2}, {3, -6, -3, 0}, {9, -6, 9, 1},
    {4, 4, 0, 1}, {-4, 6, 15, -3}, {5, 0, 10, -7}, {-10, 0, -3, 0},
    {-7, 4, 2, 1}, {4, -2, 12, 6}, {-1, 4, 10, -4}, {6, -1, -5, -6},
    {4, -2, 6, 9}, {-3, 2, -3, 3}, {4, 5, -4, -4}, {0, 7, 1, 1},
    {0, 4, 3, -3}, {4, -10, 0, -6}, {-5, -2, -4, 1}, {0, -7, -5, 2},
    {-1, 10, -9, 2}, {1, -9, -9, -7}, {-1, -3, -3, 1}, {-11, 5, 0, -5},
    {-5, 9, 5, -4}, {-5, 7, 1, -1}, {-10, 6, 3, -11}, {0, 1, 8, 12},
    {2, 8, 6, -7}, {7, -6, 1, 6}, {0, 9, 6, 13}, {5, 6, 4, 5},
    {-10, 1, 5, 9}, {5, 4, 2, -2}, {4, 6, 0, 3}, {0, 1, 0, 5},
    {3, 0, 2, 1}, {1, 9, -1, 13}, {-6, -13, 6, -12}, {7, 2, 8, 6},
    {5, 5, 1, -2}, {2, -8, 2, -5}, {1, -8, 5, 3}, {3, 6, 6, 1},
    {0, -4, -9, -5}, {4, 0, 0, 7}, {0, 6, 4, -7}, {7, -1, -7, -1},
    {-2, 0, -1, 0}, {15, 2, -2, 10}, {-5, 2, 4, 1}, {1, -5, 7, 8},
    {-9, 8, 1, 8}, {3, -4, -7, -11}, {-4, -3, -4, -13}, {7, 3, 3, -6},
    {11, 1, -7, 15}, {5, -1, -2, -6}, {5, -8, 0, -4}, {-13, -5, 2, 1},
    {-6, 7, 6, 7}, {-7, -3, -9, -12}, {-3, 1, 4, 0}, {-2, -2, -4, -5},
    {1, -5, 6, 5}, {-1, 10, 5, -1}, {-5, 10, 2, -8}, {3, -4, -2, 0},
    {-7, -7, 5, -2}, {1, -14, 6, -8}, {-6, 4, -2, 4}, {-8, -1, 9, -9},
    {0, -4, -6, -5}, {-1, -3, -5, -7}, {-5, 7, -4, -11}, {-3, 3, -1, -4},
    {-4, 3, -2, 0}, {-4, 14, 1, -5}, {-1, -13, 6, -11}, {1, 7, -1, 2},
    {-10, -8, -12, -6}, {8, 5, 3, 0}, {11, -12, 5, 0}, {4, -2, -2, 3},
    {10, -8, -3, 0}, {2, -11, -5, 6}, {1, 2, 6, -3}, {2, -2, -2, -3},
    {7, -3, -2, 8}, {10, -6, -10, 2}, {4, -2, 4, -7}, {-4, 4, -11, -11},
    {1, 13, -6, 1}, {1, 3, -2, -5}, {-6, -5, -2, 2}, {2, -13, 15, -5},
    {2, -7, 5, -12}, {3, 1, 1, -1}, {0, -2, 0, -1}, {6, -3, -1, 5},
}};

}  // namespace mosaic
