"""Shared constants for the builtin check catalog."""

GUIDE_BASE = (
    "https://docs.prismacloud.io/en/enterprise-edition/policy-reference/"
    "kubernetes-policies/kubernetes-policy-index/"
)


def guide(slug: str) -> str:
    return GUIDE_BASE + slug
