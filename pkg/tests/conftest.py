import hypothesis

# Property tests drive exact enumerations whose first call can be slow and
# whose cost varies with the drawn dimension; a wall-clock deadline would
# make them flaky.  Derandomization keeps CI runs reproducible.
hypothesis.settings.register_profile(
    "procsup",
    deadline=None,
    max_examples=60,
    derandomize=True,
)
hypothesis.settings.load_profile("procsup")
