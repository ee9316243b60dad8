#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbfp/trace.hpp"

namespace fbfp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension mismatch, non-finite data, or a violated precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class CatalogMiss : public Error {
public:
    using Error::Error;
};

// A declared Lipschitz constant or monotonicity flag failed randomized auditing.
class AuditFailure : public Error {
public:
    using Error::Error;
};

class InfeasibleSchedule : public Error {
public:
    using Error::Error;
};

class SummabilityError : public Error {
public:
    using Error::Error;
};

class InvalidSample : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class OracleFailure : public Error {
public:
    using Error::Error;
};

// Power iteration did not settle; carries the last iterate.
class EstimationFailure : public Error {
public:
    EstimationFailure(const std::string& what, Eigen::VectorXd last)
        : Error(what), last_iterate_(std::move(last)) {}
    const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

private:
    Eigen::VectorXd last_iterate_;
};

// An iterate became non-finite. The partial trace is kept so callers can dump it.
class Divergence : public Error {
public:
    Divergence(const std::string& what, std::vector<TraceRecord> trace)
        : Error(what), trace_(std::make_shared<std::vector<TraceRecord>>(std::move(trace))) {}
    const std::vector<TraceRecord>& trace() const { return *trace_; }

private:
    std::shared_ptr<std::vector<TraceRecord>> trace_;
};

}  // namespace fbfp
