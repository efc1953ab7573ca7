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

#include "coop/authz/execution_validator.h"

#include "coop/common/status.h"

namespace coop::authz {

absl::Status AuthzExecutionValidator::ValidateExecution(
    std::string_view credential, const AlgoRef& algo,
    const MemberId& owner) const {
  if (credential.starts_with(kDirectiveCredentialPrefix)) {
    std::optional<Directive> d = consent_->LookupDirective(credential);
    if (!d || d->algo != algo || d->subject != owner) {
      return Unauthenticated("invalid-token");
    }
    return absl::OkStatus();
  }
  const Introspection token = binding_->Introspect(credential);
  if (!token.active || token.grants.algo != algo ||
      !token.grants.scope.Covers(owner)) {
    return Unauthenticated("invalid-token");
  }
  if (token.grants.scope.kind == Scope::Kind::kSingleSubject &&
      !consent_->Check(owner, algo, token.grants.purpose, token.querier,
                       clock_->Now())) {
    return PermissionDenied("consent-required");
  }
  return absl::OkStatus();
}

}  // namespace coop::authz
