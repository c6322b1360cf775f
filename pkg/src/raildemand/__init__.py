"""Rail passenger demand: log-log regressions, bagged model trees and fare elasticities."""
from .data import (DataError, Dataset, Direction, FareCategory, SizeClass, classify_settlement, deflate, ingest,
                   load_archive, save_archive, zone_of_distance)
from .describe import settlement_pair_matrix, share_growth_table
from .design import DesignMatrix, Specification, build_design_matrix, feature_frame
from .elasticity import (ElasticityReport, GroupElasticityTable, TripType, elasticity_distribution,
                         group_elasticity, point_elasticity)
from .forest import (BaggedForest, ForestConfig, ImportanceTable, cv_r2, fit_forest, load_forest, oob_predict,
                     predict_mean, save_forest, variable_importance)
from .linreg import OlsFit, fit_by_fare_category, fit_ols, ols
from .pricing import (Action, PricingRecommendation, TariffSchedule, category_revenue_projection, optimal_tariff,
                      recommend_direction, revenue_delta)
from .synth import GroundTruth, SynthConfig, generate, paper_calibrated_preset
from .tree import ModelTree, SplitRule, TreeConfig, best_split, grow_tree, predict, split_sse

__version__ = "0.1.0"
