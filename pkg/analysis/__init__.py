from .bootstrap import BootstrapResult, bootstrap_uncertainty
from .bias import BiasRow, BiasReport, bias_influence, bias_report, mean_abs_gap
from .leaderboard import Leaderboard, LeaderboardRow, build_leaderboard, univariate_task_leaderboard
from .efficiency import EfficiencyPoint, EfficiencyCurve, efficiency_gain, sample_efficiency_curve
from .render import as_markdown_table, fmt_pm, write_frame, write_text
