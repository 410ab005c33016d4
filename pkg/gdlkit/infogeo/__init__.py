from gdlkit.infogeo.fisher import (
    FisherReport,
    InfoLoss,
    NodeScoreModel,
    expectation_of_score_gradient,
    fisher_as_covariance,
    fisher_as_expected_hessian,
    fisher_matrix,
    fisher_rank,
    information_loss,
    kl_quadratic_check,
    summed_fisher,
    write_fisher_report,
)
