function fetchAsset(name) {
  return 'https://cdn.example.org/' + name;
}

module.exports = { fetchAsset: fetchAsset };
