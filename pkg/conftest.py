collect_ignore_glob = []
try:
    import combplan_plots  # noqa: F401
except ImportError:
    # the primary suite must run without the plots package built
    collect_ignore_glob.append("plots/*")
