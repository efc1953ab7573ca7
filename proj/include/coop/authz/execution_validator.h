// Copyright 2026 The Coopnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef COOP_AUTHZ_EXECUTION_VALIDATOR_H_
#define COOP_AUTHZ_EXECUTION_VALIDATOR_H_

#include <string_view>

#include "coop/authz/binding.h"
#include "coop/authz/consent.h"
#include "coop/pds/pds_service.h"

namespace coop::authz {

// Store-side credential check. An access token must be active, grant this
// exact algorithm version and cover the store owner; single-subject tokens
// additionally need the subject's consent in force right now. Issuance
// directives are accepted for their own subject and algorithm only.
class AuthzExecutionValidator final : public pds::ExecutionValidator {
 public:
  AuthzExecutionValidator(const BindingService* binding,
                          const ConsentRegistry* consent, const Clock* clock)
      : binding_(binding), consent_(consent), clock_(clock) {}

  absl::Status ValidateExecution(std::string_view credential,
                                 const AlgoRef& algo,
                                 const MemberId& owner) const override;

 private:
  const BindingService* binding_;
  const ConsentRegistry* consent_;
  const Clock* clock_;
};

}  // namespace coop::authz

#endif  // COOP_AUTHZ_EXECUTION_VALIDATOR_H_
