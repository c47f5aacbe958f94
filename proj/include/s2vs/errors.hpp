#pragma once

#include <stdexcept>
#include <string>

namespace s2vs {

// Base of all library errors. Each concrete type carries a distinct process
// exit code so CLI failures are scriptable.
class Error : public std::runtime_error {
public:
    Error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

#define S2VS_DEFINE_ERROR(Name, Code)                                        \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(Code, what) {}        \
    }

S2VS_DEFINE_ERROR(IngestError, 10);
S2VS_DEFINE_ERROR(EmptyVideoError, 11);
S2VS_DEFINE_ERROR(FormatError, 12);
S2VS_DEFINE_ERROR(SingularCovarianceError, 13);
S2VS_DEFINE_ERROR(DimensionError, 14);
S2VS_DEFINE_ERROR(EmptyInputError, 15);
S2VS_DEFINE_ERROR(NoPositivesError, 16);
S2VS_DEFINE_ERROR(RowWithoutNegativesError, 17);
S2VS_DEFINE_ERROR(QueryWithoutPositivesError, 18);
S2VS_DEFINE_ERROR(ConfigError, 19);
S2VS_DEFINE_ERROR(ConsistencyError, 20);
S2VS_DEFINE_ERROR(InsufficientCorpusError, 21);

#undef S2VS_DEFINE_ERROR

}  // namespace s2vs
