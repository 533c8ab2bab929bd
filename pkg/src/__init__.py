# METARX Source Package
