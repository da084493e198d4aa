#include "ero/presets.hpp"

#include <map>

#include "ero/experiment.hpp"

namespace ero {

namespace {

const std::map<std::string, const char*>& documents() {
    static const std::map<std::string, const char*> table = {
        {"bs1d_convergence", R"json({
  "id": "bs1d_convergence",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.0,
    "covariance": [
      [0.09]
    ],
    "spot": [100.0]
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 16
  },
  "sampling": {
    "train_paths": 51200,
    "test_paths": 51200,
    "seed": 1
  },
  "level": 4,
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "references": [
    "tree",
    "closed_form"
  ],
  "tree_levels": 50000,
  "levelset": {
    "axes": [
      "t",
      0
    ],
    "t_slice": 0.5,
    "bounds": [0.0, 1.0, 50.0, 110.0],
    "resolution": [101, 121]
  }
})json"},
        {"bs1d_figure1", R"json({
  "id": "bs1d_figure1",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.0,
    "covariance": [
      [0.09]
    ],
    "spot": [100.0]
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 100
  },
  "sampling": {
    "train_paths": 100,
    "test_paths": 100,
    "seed": 1
  },
  "basis": {
    "degree": 0
  },
  "optimizer": {
    "max_iters": 20
  }
})json"},
        {"basket2d", R"json({
  "id": "basket2d",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.0,
    "covariance": [
      [0.09, 0.0],
      [0.0, 0.09]
    ],
    "spot": [100.0, 100.0]
  },
  "payoff": {
    "type": "basket_put",
    "strike": 100.0,
    "weights": [0.5, 0.5]
  },
  "grid": {
    "T": 1.0,
    "N": 8
  },
  "sampling": {
    "train_paths": 400000,
    "test_paths": 400000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "references": [
    "european",
    "longstaff_schwartz"
  ],
  "ls_degree": 2
})json"},
        {"basket5d", R"json({
  "id": "basket5d",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.0,
    "covariance": [
      [0.09, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.09, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.09, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.09, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.09]
    ],
    "spot": [100.0, 100.0, 100.0, 100.0, 100.0]
  },
  "payoff": {
    "type": "basket_put",
    "strike": 100.0,
    "weights": [0.2, 0.2, 0.2, 0.2, 0.2]
  },
  "grid": {
    "T": 1.0,
    "N": 8
  },
  "sampling": {
    "train_paths": 400000,
    "test_paths": 400000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "references": [
    "european",
    "longstaff_schwartz"
  ],
  "ls_degree": 2
})json"},
        {"basket10d", R"json({
  "id": "basket10d",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.0,
    "covariance": [
      [0.09, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.09, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.09, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.09, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.09, 0.0, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.0, 0.09, 0.0, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09, 0.0, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09, 0.0, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09, 0.0],
      [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09]
    ],
    "spot": [100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0]
  },
  "payoff": {
    "type": "basket_put",
    "strike": 100.0,
    "weights": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
  },
  "grid": {
    "T": 1.0,
    "N": 8
  },
  "sampling": {
    "train_paths": 400000,
    "test_paths": 400000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "references": [
    "european",
    "longstaff_schwartz"
  ],
  "ls_degree": 2
})json"},
        {"maxcall", R"json({
  "id": "maxcall",
  "model": {
    "type": "black_scholes",
    "rate": 0.05,
    "dividend": 0.1,
    "covariance": [
      [0.04, 0.0],
      [0.0, 0.04]
    ],
    "spot": [100.0, 100.0]
  },
  "payoff": {
    "type": "max_call",
    "strike": 100.0
  },
  "grid": {
    "T": 3.0,
    "N": 8
  },
  "sampling": {
    "train_paths": 400000,
    "test_paths": 400000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "references": [
    "european",
    "longstaff_schwartz"
  ],
  "ls_degree": 2,
  "levelset": {
    "axes": [0, 1],
    "t_slice": 1.5,
    "bounds": [50.0, 250.0, 50.0, 250.0],
    "resolution": [201, 201]
  }
})json"},
        {"heston1d", R"json({
  "id": "heston1d",
  "model": {
    "type": "heston",
    "rate": 0.05,
    "kappa": 3.0,
    "theta": 0.05,
    "xi": 0.5,
    "correlation": [
      [1.0, -0.5],
      [-0.5, 1.0]
    ],
    "spot": [100.0],
    "v0": 0.15
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 32
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "strikes": [90.0, 92.5, 95.0, 97.5, 100.0, 102.5, 105.0, 107.5, 110.0, 112.5, 115.0, 117.5, 120.0, 122.5, 125.0, 127.5, 130.0, 132.5, 135.0, 137.5, 140.0, 142.5, 145.0, 147.5, 150.0],
  "references": [
    "european"
  ],
  "levelset": {
    "axes": [0, 1],
    "t_slice": 0.5,
    "bounds": [50.0, 150.0, 0.0, 0.5],
    "resolution": [101, 101]
  }
})json"},
        {"heston10d", R"json({
  "id": "heston10d",
  "model": {
    "type": "heston",
    "rate": 0.05,
    "kappa": 3.0,
    "theta": 0.05,
    "xi": 0.5,
    "correlation": [
      [1.0, 0.2, 0.2, 0.35, 0.2, 0.25, 0.2, 0.2, 0.3, 0.2, -0.5],
      [0.2, 1.0, 0.2, 0.2, 0.2, 0.125, 0.45, 0.2, 0.2, 0.45, -0.5],
      [0.2, 0.2, 1.0, 0.2, 0.2, 0.2, 0.2, 0.2, 0.45, 0.2, -0.5],
      [0.35, 0.2, 0.2, 1.0, 0.2, 0.2, 0.2, 0.2, 0.425, 0.2, -0.5],
      [0.2, 0.2, 0.2, 0.2, 1.0, 0.1, 0.2, 0.2, 0.5, 0.2, -0.5],
      [0.25, 0.125, 0.2, 0.2, 0.1, 1.0, 0.2, 0.2, 0.35, 0.2, -0.5],
      [0.2, 0.45, 0.2, 0.2, 0.2, 0.2, 1.0, 0.2, 0.2, 0.2, -0.5],
      [0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 1.0, 0.2, -0.1, -0.5],
      [0.3, 0.2, 0.45, 0.425, 0.5, 0.35, 0.2, 0.2, 1.0, 0.2, -0.5],
      [0.2, 0.45, 0.2, 0.2, 0.2, 0.2, 0.2, -0.1, 0.2, 1.0, -0.5],
      [-0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 1]
    ],
    "spot": [100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0],
    "v0": 0.15
  },
  "payoff": {
    "type": "basket_put",
    "strike": 100.0,
    "weights": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
  },
  "grid": {
    "T": 1.0,
    "N": 32
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "strikes": [80.0, 85.0, 90.0, 95.0, 100.0, 105.0, 110.0, 115.0, 120.0, 125.0, 130.0, 135.0],
  "references": [
    "european"
  ]
})json"},
        {"rbergomi", R"json({
  "id": "rbergomi",
  "model": {
    "type": "rough_bergomi",
    "hurst": 0.07,
    "eta": 1.9,
    "rho": -0.9,
    "rate": 0.05,
    "spot": 100.0,
    "v0": 0.09
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 128
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "lags": [],
  "strikes": [70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0],
  "references": [
    "european"
  ],
  "levelset": {
    "axes": [0, 1],
    "t_slice": 0.5,
    "bounds": [50.0, 150.0, 0.0, 0.4],
    "resolution": [101, 101]
  }
})json"},
        {"rbergomi_j1", R"json({
  "id": "rbergomi_j1",
  "model": {
    "type": "rough_bergomi",
    "hurst": 0.07,
    "eta": 1.9,
    "rho": -0.9,
    "rate": 0.05,
    "spot": 100.0,
    "v0": 0.09
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 128
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "lags": [0.125],
  "strikes": [70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0],
  "references": [
    "european"
  ],
  "levelset": {
    "axes": [0, 1],
    "t_slice": 0.5,
    "bounds": [50.0, 150.0, 0.0, 0.4],
    "resolution": [101, 101]
  }
})json"},
        {"rbergomi_j3", R"json({
  "id": "rbergomi_j3",
  "model": {
    "type": "rough_bergomi",
    "hurst": 0.07,
    "eta": 1.9,
    "rho": -0.9,
    "rate": 0.05,
    "spot": 100.0,
    "v0": 0.09
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 128
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "lags": [0.125, 0.25, 0.375],
  "strikes": [70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0],
  "references": [
    "european"
  ],
  "levelset": {
    "axes": [0, 1],
    "t_slice": 0.5,
    "bounds": [50.0, 150.0, 0.0, 0.4],
    "resolution": [101, 101]
  }
})json"},
        {"rbergomi_j7", R"json({
  "id": "rbergomi_j7",
  "model": {
    "type": "rough_bergomi",
    "hurst": 0.07,
    "eta": 1.9,
    "rho": -0.9,
    "rate": 0.05,
    "spot": 100.0,
    "v0": 0.09
  },
  "payoff": {
    "type": "put",
    "strike": 100.0
  },
  "grid": {
    "T": 1.0,
    "N": 128
  },
  "sampling": {
    "train_paths": 100000,
    "test_paths": 100000,
    "seed": 1
  },
  "basis": {
    "degree": 2
  },
  "optimizer": {
    "max_iters": 20
  },
  "lags": [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875],
  "strikes": [70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0],
  "references": [
    "european"
  ],
  "levelset": {
    "axes": [0, 1],
    "t_slice": 0.5,
    "bounds": [50.0, 150.0, 0.0, 0.4],
    "resolution": [101, 101]
  }
})json"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, doc] : documents()) names.push_back(name);
    return names;
}

nlohmann::json preset_document(const std::string& name) {
    const auto it = documents().find(name);
    if (it == documents().end()) throw ConfigError("unknown preset '" + name + "'");
    return nlohmann::json::parse(it->second);
}

}  // namespace ero
